"""Tau-adapted polar quadrature on the truncated disk, log-domain
integration, and discrete measures.

The grid partitions [0, r_cut] into annuli whose radial width tracks
tau(r)/2, so integrands that live on the natural scale of the weight are
resolved uniformly well all the way to the truncation radius.  Each annulus
carries a Gauss-Legendre radial rule and a uniform (even-count) angular
rule; the angular count grows like 8 pi r / tau(r) to resolve kernel
oscillation.  Refining ``density`` shrinks the annuli and raises the angular
counts proportionally.

Integration happens in the log domain throughout: integrands are passed as
log-values and combined with log-weights by a max-shifted exponential sum,
so quantities such as omega(r)^{p/2} near the boundary never underflow.  All
reductions are plain numpy sums over fixed arrays, hence deterministic.

Measures are discrete: an atom list with log-masses, typically obtained by
pushing the grid forward under a symbol (``pullback_measure``).  Continuous
measures enter only through this sampling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np
from scipy.spatial import cKDTree

from .errors import (ArgumentError, ContractError, DomainError,
                     EvaluationError, ResourceError)
from .symbols import Symbol
from .weights import WeightSpec

__all__ = [
    "DiskQuadrature",
    "DiscreteMeasure",
    "LogIntegral",
    "build_grid",
    "build_probe_grid",
    "tau_ladder",
    "integrate_log",
    "lambda_norm",
    "lambda_norm_log",
    "pullback_measure",
    "dump_grid",
    "load_grid",
]

NODE_BUDGET = 50_000_000

_gauss_cache: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def _gauss_rule(order: int) -> tuple[np.ndarray, np.ndarray]:
    rule = _gauss_cache.get(order)
    if rule is None:
        rule = np.polynomial.legendre.leggauss(order)
        _gauss_cache[order] = rule
    return rule


class LogIntegral(NamedTuple):
    """A nonnegative integral in the log domain; sign 0 means exactly zero."""

    log_value: float
    sign: float

    @property
    def value(self) -> float:
        return math.exp(self.log_value) if self.sign else 0.0


def logsumexp(values: np.ndarray, axis=None) -> np.ndarray | float:
    """Max-shifted exponential sum; tolerates -inf entries."""
    values = np.asarray(values, dtype=float)
    m = np.max(values, axis=axis, keepdims=True) if values.size else np.float64(-np.inf)
    m = np.where(np.isfinite(m), m, 0.0)
    out = np.log(np.sum(np.exp(values - m), axis=axis)) + np.squeeze(m, axis=axis)
    return out


@dataclass
class DiskQuadrature:
    """Nodes, log-weights and cached weight data on the truncated disk."""

    weight: WeightSpec
    r_cut: float
    density: float
    points: np.ndarray          # complex nodes
    radii: np.ndarray           # |points|
    log_weights: np.ndarray
    annulus_edges: np.ndarray   # length n_annuli + 1
    annulus_slices: list[tuple[int, int]]
    angular_counts: np.ndarray
    # cached weight data at nodes
    log_omega: np.ndarray = field(repr=False, default=None)
    phi_prime: np.ndarray = field(repr=False, default=None)
    log1p_phi_prime: np.ndarray = field(repr=False, default=None)
    tau: np.ndarray = field(repr=False, default=None)
    laplacian: np.ndarray = field(repr=False, default=None)

    def __post_init__(self):
        if self.log_omega is None:
            w, r = self.weight, self.radii
            self.log_omega = np.asarray(w.log_omega(r), float)
            self.phi_prime = np.asarray(w.phi_prime(r), float)
            self.log1p_phi_prime = np.log1p(self.phi_prime)
            self.tau = np.asarray(w.tau(r), float)
            self.laplacian = np.asarray(w.laplacian(r), float)

    @property
    def n_nodes(self) -> int:
        return self.points.size

    @property
    def n_annuli(self) -> int:
        return len(self.annulus_slices)

    @property
    def annulus_mid(self) -> np.ndarray:
        return 0.5 * (self.annulus_edges[:-1] + self.annulus_edges[1:])

    def weights_linear(self) -> np.ndarray:
        return np.exp(self.log_weights)

    def annulus_lambda_masses(self) -> np.ndarray:
        """Per-annulus mass of d(lambda) = laplacian_phi dA, radially exact."""
        x, gw = _gauss_rule(16)
        lo = self.annulus_edges[:-1][:, None]
        hi = self.annulus_edges[1:][:, None]
        r = 0.5 * (hi - lo) * x[None, :] + 0.5 * (hi + lo)
        f = 2.0 * r * np.asarray(self.weight.laplacian(r.ravel()), float).reshape(r.shape)
        return np.sum(f * gw[None, :], axis=1) * 0.5 * (hi - lo)[:, 0]


def tau_ladder(w: WeightSpec, r_cut: float, density: float = 1.0) -> np.ndarray:
    """Annulus edges from 0 to r_cut with width tau(midpoint) / (2 density).

    The midpoint is settled by a short fixed-point refinement; the shared
    ladder keeps quadrature annuli and criteria shells on the same radii.
    """
    if not 0.0 < r_cut < 1.0:
        raise DomainError(f"r_cut {r_cut} outside (0, 1)")
    if r_cut > w.r_max_guard:
        raise DomainError(
            f"r_cut {r_cut} beyond r_max_guard {w.r_max_guard:.6f}")
    if density <= 0.0:
        raise ArgumentError("density must be positive")
    edges = [0.0]
    while edges[-1] < r_cut:
        r0 = edges[-1]
        h = float(w.tau(min(r0, r_cut))) / (2.0 * density)
        for _ in range(2):
            h = float(w.tau(min(r0 + 0.5 * h, r_cut))) / (2.0 * density)
        edges.append(min(r0 + h, r_cut))
        if len(edges) > 200_000:
            raise ResourceError("annulus subdivision did not terminate")
    return np.array(edges)


def build_grid(w: WeightSpec, r_cut: float, density: float = 1.0,
               radial_order: int = 8, min_angular: int = 64,
               node_budget: int = NODE_BUDGET) -> DiskQuadrature:
    """Build the tau-adapted polar product rule on |z| <= r_cut.

    ``min_angular`` lowers the angular floor for coarse probe grids whose
    integrands are nearly radial.
    """
    edges = tau_ladder(w, r_cut, density)

    x, gw = _gauss_rule(radial_order)
    mids = 0.5 * (edges[:-1] + edges[1:])
    tau_mid = np.asarray(w.tau(mids), float)
    counts = np.maximum(min_angular,
                        np.ceil(8.0 * np.pi * mids * density / tau_mid)).astype(int)
    counts += counts % 2  # even counts keep the node set symmetric under z -> -z

    n_total = int(np.sum(counts * radial_order))
    if n_total > node_budget:
        raise ResourceError(
            f"grid would need {n_total} nodes, budget is {node_budget}")

    pts, radii_all, logw_all, slices = [], [], [], []
    start = 0
    for i in range(len(mids)):
        lo, hi = edges[i], edges[i + 1]
        r_nodes = 0.5 * (hi - lo) * x + 0.5 * (hi + lo)
        w_nodes = gw * 0.5 * (hi - lo)
        n_theta = counts[i]
        theta = 2.0 * np.pi * np.arange(n_theta) / n_theta
        ring = np.exp(1j * theta)
        pts.append((r_nodes[:, None] * ring[None, :]).ravel())
        radii_all.append(np.repeat(r_nodes, n_theta))
        # normalized area: dA = (1/pi) r dr dtheta
        logw_all.append(np.repeat(
            np.log(2.0 * w_nodes * r_nodes / n_theta), n_theta))
        n_here = r_nodes.size * n_theta
        slices.append((start, start + n_here))
        start += n_here

    return DiskQuadrature(
        weight=w, r_cut=r_cut, density=density,
        points=np.concatenate(pts),
        radii=np.concatenate(radii_all),
        log_weights=np.concatenate(logw_all),
        annulus_edges=edges,
        annulus_slices=slices,
        angular_counts=counts,
    )


def build_probe_grid(w: WeightSpec, r_cut: float, density: float = 0.4,
                     radial_order: int = 4, n_theta: int = 16) -> DiskQuadrature:
    """Coarse polar rule for outer integrals of smooth radial-ish statistics.

    Same tau-tracking annuli as build_grid but with a fixed (even) angular
    count, for use as the z-side quadrature of norm statistics whose
    integrand varies on the tau scale but does not oscillate.
    """
    if n_theta % 2:
        n_theta += 1
    edges = tau_ladder(w, r_cut, density)
    x, gw = _gauss_rule(radial_order)
    pts, radii_all, logw_all, slices = [], [], [], []
    start = 0
    ring = np.exp(2j * np.pi * np.arange(n_theta) / n_theta)
    for i in range(edges.size - 1):
        lo, hi = edges[i], edges[i + 1]
        r_nodes = 0.5 * (hi - lo) * x + 0.5 * (hi + lo)
        w_nodes = gw * 0.5 * (hi - lo)
        pts.append((r_nodes[:, None] * ring[None, :]).ravel())
        radii_all.append(np.repeat(r_nodes, n_theta))
        logw_all.append(np.repeat(
            np.log(2.0 * w_nodes * r_nodes / n_theta), n_theta))
        n_here = r_nodes.size * n_theta
        slices.append((start, start + n_here))
        start += n_here
    return DiskQuadrature(
        weight=w, r_cut=r_cut, density=density,
        points=np.concatenate(pts), radii=np.concatenate(radii_all),
        log_weights=np.concatenate(logw_all), annulus_edges=edges,
        annulus_slices=slices,
        angular_counts=np.full(edges.size - 1, n_theta),
    )


def _log_values(grid: DiskQuadrature, log_f) -> np.ndarray:
    if callable(log_f):
        log_f = log_f(grid.points)
    log_f = np.asarray(log_f, dtype=float)
    if log_f.shape != grid.points.shape:
        raise ArgumentError("log-integrand shape does not match the grid")
    return log_f


def integrate_log(grid: DiskQuadrature, log_f) -> LogIntegral:
    """Integrate exp(log_f) against the grid, staying in the log domain.

    ``log_f`` is an array of log-values at the nodes or a callable producing
    one; -inf entries denote exact zeros.  NaN raises with the offending
    node location.
    """
    log_f = _log_values(grid, log_f)
    bad = np.isnan(log_f)
    if np.any(bad):
        idx = int(np.argmax(bad))
        raise EvaluationError(
            f"integrand is NaN at node {idx} (z = {grid.points[idx]})")
    total = log_f + grid.log_weights
    m = float(np.max(total))
    if m == -np.inf:
        return LogIntegral(-np.inf, 0.0)
    return LogIntegral(m + math.log(float(np.sum(np.exp(total - m)))), 1.0)


def integrate_values(grid: DiskQuadrature, values: np.ndarray) -> complex:
    """Plain linear-domain integral for well-scaled (complex) integrands."""
    values = np.asarray(values)
    if values.shape != grid.points.shape:
        raise ArgumentError("integrand shape does not match the grid")
    return complex(np.sum(values * np.exp(grid.log_weights)))


def lambda_norm_log(grid: DiskQuadrature, log_F, s: float) -> float:
    """log of the L^s norm against d(lambda) = laplacian_phi dA.

    ``s = inf`` returns the log of the sup over the nodes.
    """
    log_F = _log_values(grid, log_F)
    if np.any(np.isnan(log_F)):
        raise EvaluationError("lambda-norm integrand is NaN")
    if s == math.inf:
        return float(np.max(log_F))
    if s <= 0.0:
        raise ArgumentError(f"exponent s must be positive, got {s}")
    total = s * log_F - 2.0 * np.log(grid.tau) + grid.log_weights
    m = float(np.max(total))
    if m == -np.inf:
        return -math.inf
    return (m + math.log(float(np.sum(np.exp(total - m))))) / s


def lambda_norm(grid: DiskQuadrature, F, s: float) -> float:
    """L^s(d lambda) norm of a nonnegative function given in linear scale."""
    if callable(F):
        F = F(grid.points)
    F = np.asarray(F, dtype=float)
    if np.any(F < 0.0):
        raise ContractError("lambda_norm requires a nonnegative integrand")
    with np.errstate(divide="ignore"):
        log_F = np.log(F)
    val = lambda_norm_log(grid, log_F, s)
    return math.exp(val) if val > -math.inf else 0.0


@dataclass
class DiscreteMeasure:
    """Atoms with log-masses; the only measure representation used here."""

    points: np.ndarray
    log_masses: np.ndarray
    weight: WeightSpec
    q: float
    provenance: str = "explicit"
    _tree: cKDTree | None = field(default=None, repr=False)

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=complex)
        self.log_masses = np.asarray(self.log_masses, dtype=float)
        if self.points.shape != self.log_masses.shape:
            raise ArgumentError("atoms and log-masses must align")

    @property
    def n_atoms(self) -> int:
        return self.points.size

    def total_log_mass(self) -> float:
        if self.log_masses.size == 0:
            return -math.inf
        return float(logsumexp(self.log_masses))

    def tree(self) -> cKDTree:
        if self._tree is None:
            xy = np.column_stack([self.points.real, self.points.imag])
            self._tree = cKDTree(xy)
        return self._tree

    def log_mass_in_disk(self, center: complex, radius: float) -> float:
        idx = self.tree().query_ball_point([center.real, center.imag], radius)
        if not idx:
            return -math.inf
        return float(logsumexp(self.log_masses[np.asarray(idx)]))

    def nu_log_masses(self) -> np.ndarray:
        """Reweight each atom by (1 + phi')^q omega^{-q/2} at the atom."""
        r = np.abs(self.points)
        w = self.weight
        return (self.log_masses
                + self.q * np.log1p(np.asarray(w.phi_prime(r), float))
                - 0.5 * self.q * np.asarray(w.log_omega(r), float))

    def nu_measure(self) -> "DiscreteMeasure":
        return DiscreteMeasure(self.points, self.nu_log_masses(), self.weight,
                               self.q, provenance=self.provenance + ":nu")


def pullback_measure(w: WeightSpec, psi: Symbol, g: Symbol, q: float,
                     grid: DiskQuadrature) -> DiscreteMeasure:
    """Push the grid forward under psi with the operator-induced density.

    Atom at psi(node) with mass |g(psi)|^q |psi'|^q omega^{q/2}
    (1 + phi')^{-q} times the node weight, all evaluated at the node.
    """
    if q <= 0.0:
        raise ArgumentError(f"exponent q must be positive, got {q}")
    zq = psi(grid.points)
    with np.errstate(divide="ignore"):
        log_g = np.log(np.abs(np.asarray(g(zq))))
        log_dpsi = np.log(np.abs(np.asarray(psi.derivative(grid.points))))
    log_mass = (q * log_g + q * log_dpsi
                + 0.5 * q * grid.log_omega
                - q * grid.log1p_phi_prime
                + grid.log_weights)
    return DiscreteMeasure(zq, log_mass, w, q,
                           provenance=f"pullback(psi={psi.to_spec()}, "
                                      f"g={g.to_spec()}, q={q})")


def dump_grid(grid: DiskQuadrature, path: str) -> None:
    """Write one node per line: re im weight (linear weight)."""
    data = np.column_stack([grid.points.real, grid.points.imag,
                            grid.weights_linear()])
    np.savetxt(path, data, fmt="%.17g")


def load_grid(w: WeightSpec, path: str) -> DiskQuadrature:
    """Restore a dumped grid; annulus structure is not reconstructed."""
    data = np.loadtxt(path)
    if data.ndim != 2 or data.shape[1] != 3:
        raise ArgumentError(f"grid file {path!r} must have three columns")
    points = data[:, 0] + 1j * data[:, 1]
    radii = np.abs(points)
    r_cut = float(np.max(radii))
    return DiskQuadrature(
        weight=w, r_cut=r_cut, density=float("nan"),
        points=points, radii=radii,
        log_weights=np.log(data[:, 2]),
        annulus_edges=np.array([0.0, r_cut]),
        annulus_slices=[(0, points.size)],
        angular_counts=np.array([0]),
    )
