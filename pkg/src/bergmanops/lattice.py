"""Covering lattices adapted to the tau metric, plus the local-mean checks.

A lattice is a deterministic sequence of centers whose delta*tau disks are
mutually center-free (no center inside another's disk), cover the truncated
disk, and overlap with small bounded multiplicity.  Construction runs the
greedy sweep from the covering lemma: candidates ordered by radius then
angle, accepted iff they sit in no existing disk.  The candidate set is
purpose-built from concentric rings spaced 1.05 delta tau radially and
1.4 delta tau along arcs; with those margins the greedy sweep provably
rejects nothing, which is what makes the coverage argument go through.
Ring spacing always reads tau at the ring being left, so the no-rejection
margin survives the Lipschitz drift of tau between rings.

Verification is separate from construction: separation, coverage and
multiplicity are measured on probe points and reported, never assumed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from .errors import ArgumentError, DomainError, PreconditionError
from .symbols import Symbol
from .weights import WeightSpec

__all__ = [
    "Lattice",
    "build_lattice",
    "disk_membership",
    "coverage_fraction",
    "multiplicity_report",
    "separation_report",
    "local_max_bound_check",
    "derivative_bound_check",
    "dump_lattice",
    "load_lattice",
]

RING_STEP = 1.05     # radial spacing in units of delta * tau(inner ring)
ARC_STEP = 1.4       # angular spacing in units of delta * tau(ring)


@dataclass
class Lattice:
    """Center sequence with cached tau values and a nearest-neighbor tree."""

    weight: WeightSpec
    delta: float
    r_cut: float
    centers: np.ndarray
    tau_at: np.ndarray
    _tree: cKDTree | None = field(default=None, repr=False)

    @property
    def n_centers(self) -> int:
        return self.centers.size

    def tree(self) -> cKDTree:
        if self._tree is None:
            xy = np.column_stack([self.centers.real, self.centers.imag])
            self._tree = cKDTree(xy)
        return self._tree

    def covering_index(self, z: np.ndarray, k: int = 32) -> np.ndarray:
        """Index of a center whose delta-disk contains each z, or -1.

        Queries the k nearest centers and applies the per-center radius
        condition |z - a| < delta * tau(a).
        """
        z = np.atleast_1d(np.asarray(z, complex))
        xy = np.column_stack([z.real, z.imag])
        k = min(k, self.n_centers)
        dist, idx = self.tree().query(xy, k=k)
        dist = np.atleast_2d(dist)
        idx = np.atleast_2d(idx)
        inside = dist < self.delta * self.tau_at[idx]
        first = np.argmax(inside, axis=1)
        found = inside[np.arange(z.size), first]
        out = np.where(found, idx[np.arange(z.size), first], -1)
        return out

    def disks_containing(self, z: complex, factor: float = 1.0) -> np.ndarray:
        """Centers a with |z - a| < factor * delta * tau(a)."""
        # tau(a) <= 2 tau(z) inside comparability range; 4x is a safe net
        r_net = 4.0 * factor * self.delta * float(
            self.weight.tau(np.array([abs(z)]))[0])
        cand = self.tree().query_ball_point([z.real, z.imag], r_net)
        cand = np.asarray(cand, dtype=int)
        if cand.size == 0:
            return cand
        d = np.abs(self.centers[cand] - z)
        return cand[d < factor * self.delta * self.tau_at[cand]]


def build_lattice(w: WeightSpec, delta: float, r_cut: float) -> Lattice:
    """Greedy covering sweep over ring candidates ordered by radius, angle."""
    m = w.m_tau()
    if not 0.0 < delta < m:
        raise PreconditionError(
            f"delta {delta} outside (0, m_tau) with m_tau = {m:.6f}")
    if not 0.0 < r_cut <= w.r_max_guard:
        raise DomainError(
            f"r_cut {r_cut} outside (0, r_max_guard {w.r_max_guard:.6f}]")

    # ring radii: origin, then step 1.05 delta tau read at the current ring;
    # the ladder is then rescaled so the last ring lands exactly on r_cut,
    # closing the outer band (the rescale perturbs steps by well under 1%)
    radii = [0.0]
    while radii[-1] < r_cut:
        r = radii[-1]
        radii.append(r + RING_STEP * delta * float(w.tau(np.array([r]))[0]))
        if len(radii) > 2_000_000:
            raise ArgumentError("ring construction did not terminate")
    radii = [r * (r_cut / radii[-1]) for r in radii]

    accepted: list[np.ndarray] = []
    tau_list: list[np.ndarray] = []
    recent: list[np.ndarray] = []  # xy of the last two rings, for the sweep
    for k, r in enumerate(radii):
        tau_r = float(w.tau(np.array([r]))[0])
        if r == 0.0:
            ring = np.array([0.0 + 0.0j])
        else:
            n = max(4, int(math.ceil(2.0 * math.pi * r / (ARC_STEP * delta * tau_r))))
            theta = 2.0 * math.pi * np.arange(n) / n
            if k % 2 == 1:
                theta = theta + math.pi / n  # stagger alternate rings
            ring = r * np.exp(1j * theta)

        # greedy acceptance against already-placed centers; only the two
        # previous rings can be within reach
        if recent:
            prev_xy = np.concatenate(recent, axis=0)
            prev_tree = cKDTree(prev_xy)
            prev_tau = np.concatenate(tau_list[-len(recent):])
            keep = np.ones(ring.size, dtype=bool)
            xy = np.column_stack([ring.real, ring.imag])
            r_net = delta * float(np.max(prev_tau)) * 1.001
            groups = prev_tree.query_ball_point(xy, r_net)
            for i, grp in enumerate(groups):
                if grp:
                    grp = np.asarray(grp, dtype=int)
                    d = np.linalg.norm(prev_xy[grp] - xy[i], axis=1)
                    if np.any(d < delta * prev_tau[grp]):
                        keep[i] = False
            # same-ring earlier candidates cannot reject later ones at
            # ARC_STEP spacing, so no intra-ring pass is needed
            ring = ring[keep]

        if ring.size:
            accepted.append(ring)
            tau_list.append(np.full(ring.size, tau_r))
            recent.append(np.column_stack([ring.real, ring.imag]))
            recent = recent[-2:]

    centers = np.concatenate(accepted)
    taus = np.concatenate(tau_list)
    return Lattice(weight=w, delta=delta, r_cut=r_cut,
                   centers=centers, tau_at=taus)


def disk_membership(w: WeightSpec, a: complex, delta: float, z: complex) -> bool:
    """Whether z lies in the open disk of radius delta*tau(a) around a."""
    if abs(a) >= 1.0:
        raise DomainError(f"disk center |a| = {abs(a)} not inside the disk")
    return abs(z - a) < delta * float(w.tau(np.array([abs(a)]))[0])


def coverage_fraction(lat: Lattice, probes: np.ndarray) -> float:
    """Fraction of probe points inside at least one lattice disk."""
    idx = lat.covering_index(probes)
    return float(np.mean(idx >= 0))


def separation_report(lat: Lattice) -> dict:
    """Check no center lies in another's disk; also the min-gap statistic.

    Returns the worst ratio |z_n - z_k| / (delta tau(z_k)) over neighbor
    pairs (must be >= 1) and the minimum of |z_n - z_k| over
    delta * min(tau_n, tau_k).
    """
    k = min(8, lat.n_centers)
    xy = np.column_stack([lat.centers.real, lat.centers.imag])
    dist, idx = lat.tree().query(xy, k=k)
    worst_disk = np.inf
    min_gap = np.inf
    for j in range(1, k):
        d = dist[:, j]
        other = idx[:, j]
        worst_disk = min(worst_disk, float(np.min(d / (lat.delta * lat.tau_at[other]))))
        pair_min = np.minimum(lat.tau_at, lat.tau_at[other])
        min_gap = min(min_gap, float(np.min(d / (lat.delta * pair_min))))
    return {
        "worst_disk_ratio": worst_disk,   # >= 1 iff no center in another disk
        "min_gap_ratio": min_gap,         # spec floor is 1/2
        "separated": bool(worst_disk >= 1.0),
    }


def multiplicity_report(lat: Lattice, probes: np.ndarray,
                        factor: float = 3.0) -> dict:
    """Max and histogram of how many factor*delta disks cover each probe.

    Counted from the center side: one ball query per center against a tree
    over the probes, with the center's own disk radius, so the per-center
    radii are exact and the probe count can be large.
    """
    probes = np.atleast_1d(np.asarray(probes, complex))
    probe_tree = cKDTree(np.column_stack([probes.real, probes.imag]))
    center_xy = np.column_stack([lat.centers.real, lat.centers.imag])
    radii = factor * lat.delta * lat.tau_at
    counts = np.zeros(probes.size, dtype=int)
    hits = probe_tree.query_ball_point(center_xy, radii)
    for idx in hits:
        counts[idx] += 1
    hist = np.bincount(counts)
    return {
        "max": int(np.max(counts)),
        "mean": float(np.mean(counts)),
        "histogram": hist.tolist(),
    }


def _local_disk_rule(w: WeightSpec, z: complex, delta: float,
                     n_r: int = 16, n_t: int = 32):
    """Polar quadrature over D_delta(z): nodes and normalized-area weights."""
    rad = delta * float(w.tau(np.array([abs(z)]))[0])
    x, gw = np.polynomial.legendre.leggauss(n_r)
    s = 0.5 * rad * (x + 1.0)
    ws = 0.5 * rad * gw * s
    theta = 2.0 * np.pi * np.arange(n_t) / n_t
    pts = z + s[:, None] * np.exp(1j * theta)[None, :]
    wts = np.repeat(ws, n_t) * (2.0 / n_t)  # dA = (1/pi) s ds dtheta
    return pts.ravel(), wts, rad


def local_max_bound_check(w: WeightSpec, f: Symbol, p: float, beta: float,
                          gamma: float, delta: float,
                          samples: np.ndarray) -> dict:
    """Pointwise value of |f|^p omega^beta (1+phi')^(-gamma) against its
    disk average, sampled over the given points.

    The subharmonic-type bound says the ratio is at most a constant times
    (delta tau)^(-2) times the disk integral; here the average already
    carries the area normalization, so bounded ratios are the expected
    outcome.  Points whose disk leaves the guarded range are skipped.
    """
    samples = np.atleast_1d(np.asarray(samples, complex))
    ratios, skipped = [], 0
    for z in samples:
        pts, wts, rad = _local_disk_rule(w, complex(z), delta)
        if np.max(np.abs(pts)) >= w.r_max_guard:
            skipped += 1
            continue
        def dens(pz):
            r = np.abs(pz)
            return (np.abs(np.asarray(f(pz))) ** p
                    * np.exp(beta * np.asarray(w.log_omega(r), float)
                             - gamma * np.asarray(w.log1p_phi_prime(r), float)))
        avg = float(np.sum(dens(pts) * wts)) / rad ** 2
        val = float(dens(np.array([z]))[0])
        if avg > 0.0:
            ratios.append(val / avg)
    ratios = np.asarray(ratios)
    return {
        "max_ratio": float(np.max(ratios)) if ratios.size else math.nan,
        "mean_ratio": float(np.mean(ratios)) if ratios.size else math.nan,
        "n_samples": int(ratios.size),
        "n_skipped": skipped,
    }


def derivative_bound_check(w: WeightSpec, f: Symbol, delta: float,
                           z: complex) -> dict:
    """Observed constant in |f'(z)|^2 omega(z) <= C tau^(-2) (delta tau)^(-2)
    int_{D_delta(z)} |f|^2 omega dA."""
    pts, wts, rad = _local_disk_rule(w, z, delta)
    if np.max(np.abs(pts)) >= w.r_max_guard:
        raise DomainError("disk around z leaves the guarded range")
    r = np.abs(pts)
    integral = float(np.sum(np.abs(np.asarray(f(pts))) ** 2
                            * np.exp(np.asarray(w.log_omega(r), float)) * wts))
    tau_z = float(w.tau(np.array([abs(z)]))[0])
    lhs = (abs(complex(np.asarray(f.derivative(np.array([z])))[0])) ** 2
           * math.exp(float(w.log_omega(np.array([abs(z)]))[0])))
    c_obs = lhs * tau_z ** 2 * rad ** 2 / integral if integral > 0 else math.inf
    return {"observed_constant": c_obs, "disk_integral": integral, "lhs": lhs}


def dump_lattice(lat: Lattice, path: str) -> None:
    """Write one center per line: re im tau."""
    data = np.column_stack([lat.centers.real, lat.centers.imag, lat.tau_at])
    np.savetxt(path, data, fmt="%.17g",
               header=f"delta={lat.delta!r} r_cut={lat.r_cut!r}")


def load_lattice(w: WeightSpec, path: str) -> Lattice:
    with open(path) as fh:
        first = fh.readline()
    delta = r_cut = None
    if first.startswith("#"):
        for tok in first[1:].split():
            key, _, val = tok.partition("=")
            if key == "delta":
                delta = float(val)
            elif key == "r_cut":
                r_cut = float(val)
    if delta is None or r_cut is None:
        raise ArgumentError(f"lattice file {path!r} lacks the header line")
    data = np.loadtxt(path)
    return Lattice(weight=w, delta=delta, r_cut=r_cut,
                   centers=data[:, 0] + 1j * data[:, 1], tau_at=data[:, 2])
