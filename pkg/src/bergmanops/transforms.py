"""Berezin-type transforms and the function-space norms they compare to.

The two operator families share one integral transform family: a kernel
moment of the pulled-back measure.  Everything here is phrased so that the
grid route (integrate the density over quadrature nodes) and the measure
route (sum the same terms reindexed through atoms) are available separately;
tests pin them against each other, and the criteria layer never collapses
the two.

Batching discipline: transform values are needed at dozens of probe points
against tens of thousands of nodes, so kernel rows are produced by one
scaled matrix product per probe chunk, normalized in the row scale.  With
normalized rows and omega-damped columns every intermediate stays far from
the overflow line; the raw column side alone is bounded by the weight guard.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import AccuracyError, ArgumentError, NumericalError, ResourceError
from .kernel import (KernelTable, get_table, kernel_diag_log, kernel_matrix,
                     kernel_norm_log, required_degree)
from .lattice import Lattice
from .quadrature import DiscreteMeasure, DiskQuadrature, LogIntegral, logsumexp
from .symbols import Symbol
from .weights import WeightSpec

__all__ = [
    "TransformRequest",
    "m_transform",
    "n_transform",
    "gv_transform",
    "berezin",
    "measure_moment",
    "averaging",
    "ap_norm",
    "sp_norm",
    "lp_norm",
    "embedding_constant",
    "embedding_function",
    "kernel_log_rows",
    "kernel_moment_log",
]

OP_KINDS = ("C_psi_g", "C_g_psi")


@dataclass(frozen=True)
class TransformRequest:
    """Operator family, exponents and symbols for one transform study.

    op_kind "C_psi_g" is the derivative-composition operator (kernel power
    n = 1); "C_g_psi" is the plain one (n = 0).  The boundary exponent t
    defaults to 1/p for finite p and 0 at p = infinity.
    """

    op_kind: str
    p: float
    q: float
    psi: Symbol
    g: Symbol

    def __post_init__(self):
        if self.op_kind not in OP_KINDS:
            raise ArgumentError(f"op_kind must be one of {OP_KINDS}")
        if not self.p > 0.0 or not self.q > 0.0:
            raise ArgumentError("exponents p, q must be positive")

    @property
    def n(self) -> int:
        return 1 if self.op_kind == "C_psi_g" else 0

    @property
    def t(self) -> float:
        return 0.0 if self.p == math.inf else 1.0 / self.p


def _w_arrays(w: WeightSpec, r: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    return (np.asarray(w.log_omega(r), float),
            np.asarray(w.log1p_phi_prime(r), float))


_COL_BLOCK_ENTRIES = 12_000_000  # complex entries per streamed power block


def _stream_moment(tab: KernelTable, z: np.ndarray, pts: np.ndarray, deg: int,
                   mult: float, dens: np.ndarray, row_scales) -> np.ndarray:
    """logsumexp_j of mult*log|K(z_i, pts_j)| + dens_j without holding the
    full power matrix; pts are consumed in blocks sized by the degree."""
    out = np.full(z.size, -math.inf)
    block = max(2048, _COL_BLOCK_ENTRIES // (deg + 1))
    for s in range(0, pts.size, block):
        rows = kernel_matrix(tab, z, pts[s:s + block],
                             log_row_scale=row_scales, degree=deg)
        with np.errstate(divide="ignore"):
            lr = np.log(np.abs(rows))
        part = logsumexp(mult * lr + dens[None, s:s + block], axis=1)
        np.logaddexp(out, part, out=out)
    return out


def _degree_for(w: WeightSpec, z: np.ndarray, pts: np.ndarray) -> int:
    ra = float(np.max(np.abs(z))) if z.size else 0.0
    rb = float(np.max(np.abs(pts))) if pts.size else 0.0
    try:
        return required_degree(w, math.sqrt(ra * rb))
    except ResourceError as exc:
        raise AccuracyError(
            f"kernel series cannot reach |psi| = {rb:.6f} "
            f"(from probe radius {ra:.6f})", achieved=rb,
            target=w.r_max_guard) from exc


def kernel_moment_log(w: WeightSpec, z, pts: np.ndarray, p: float, mult: float,
                      log_dens: np.ndarray, grid: DiskQuadrature | None = None,
                      table: KernelTable | None = None):
    """log sum_j |k_{p,z}(pts_j)|^mult exp(log_dens_j), batched over z.

    The workhorse behind every kernel-moment transform: normalized rows,
    column blocks streamed so memory stays flat in the node count.
    """
    z_arr = np.atleast_1d(np.asarray(z, complex))
    pts = np.asarray(pts, complex)
    finite = log_dens > -np.inf
    if not np.any(finite):
        out = np.full(z_arr.size, -math.inf)
        return out if np.ndim(z) else float(out[0])
    scales = _normalizing_scales(w, z_arr, p, grid, table)
    deg = _degree_for(w, z_arr, pts[finite])
    tab = table.extend(deg) if table is not None else get_table(w, deg)
    out = _stream_moment(tab, z_arr, pts[finite], deg, mult,
                         log_dens[finite], scales)
    out = out.reshape(z_arr.shape)
    return out if np.ndim(z) else float(out[0])


def _normalizing_scales(w: WeightSpec, z: np.ndarray, p: float,
                        grid: DiskQuadrature | None,
                        table: KernelTable | None) -> np.ndarray:
    """-log ||K_z||_p batched.

    Radial weights make the norm a function of |z| alone, so the batch is
    collapsed to unique radii first; p not in {2, inf} integrates one kernel
    row per unique radius over the grid.
    """
    z = np.asarray(z, complex)
    if p == 2.0:
        return -0.5 * kernel_diag_log(w, z, table)
    radii, inverse = np.unique(np.round(np.abs(z), 14), return_inverse=True)
    if p == math.inf:
        per = np.array([kernel_norm_log(w, complex(r), p, table=table)
                        for r in radii])
        return -per[inverse].reshape(z.shape)
    if grid is None:
        raise ArgumentError(f"normalizing kernels for p={p} needs a grid")
    rho = math.sqrt(float(radii[-1]) * grid.r_cut) if radii.size else 0.0
    deg = required_degree(w, rho)
    tab = table.extend(deg) if table is not None else get_table(w, deg)
    dens = grid.log_weights + 0.5 * p * grid.log_omega
    per = _stream_moment(tab, radii.astype(complex), grid.points, deg,
                         p, dens, 0.0) / p
    return -per[inverse].reshape(z.shape)


def kernel_log_rows(w: WeightSpec, z: np.ndarray, pts: np.ndarray, p: float,
                    grid: DiskQuadrature | None = None,
                    table: KernelTable | None = None) -> np.ndarray:
    """log |k_{p,z_i}(pts_j)| for normalized kernels, chunked matrix products.

    Materializes the full z-by-pts matrix; callers that only reduce over
    pts should go through kernel_moment_log instead.
    """
    z = np.atleast_1d(np.asarray(z, complex))
    pts = np.asarray(pts, complex)
    scales = _normalizing_scales(w, z, p, grid, table)
    deg = _degree_for(w, z, pts)
    tab = table.extend(deg) if table is not None else get_table(w, deg)
    out = np.empty((z.size, pts.size))
    col_block = max(2048, _COL_BLOCK_ENTRIES // (deg + 1))
    for s in range(0, z.size, 512):
        for t in range(0, pts.size, col_block):
            block = kernel_matrix(tab, z[s:s + 512], pts[t:t + col_block],
                                  log_row_scale=scales[s:s + 512], degree=deg)
            with np.errstate(divide="ignore"):
                out[s:s + 512, t:t + col_block] = np.log(np.abs(block))
    return out


def _m_density_log(req: TransformRequest, w: WeightSpec,
                   grid: DiskQuadrature) -> tuple[np.ndarray, np.ndarray]:
    """psi-image points and the z-free log-density of the M integrand."""
    zq = np.asarray(req.psi(grid.points))
    with np.errstate(divide="ignore"):
        log_g = np.log(np.abs(np.asarray(req.g(zq))))
        log_dpsi = np.log(np.abs(np.asarray(req.psi.derivative(grid.points))))
    dens = (req.q * log_g + req.q * log_dpsi
            + 0.5 * req.q * grid.log_omega
            - req.q * grid.log1p_phi_prime)
    if req.n:
        _, l1p = _w_arrays(w, np.abs(zq))
        dens = dens + req.n * req.q * l1p
    return zq, dens


def m_transform(req: TransformRequest, z, grid: DiskQuadrature,
                table: KernelTable | None = None):
    """log M^psi_{n,p,q}(g)(z) over the grid; batched over z.

    Integrand |k_{p,z}(psi xi)|^q |g(psi xi)|^q |psi'(xi)|^q
    (1+phi'(psi xi))^{nq} (1+phi'(xi))^{-q} omega(xi)^{q/2}.
    Returns -inf where the integrand vanishes identically.
    """
    if req.q == math.inf:
        raise ArgumentError("m_transform needs finite q; q = inf is the "
                            "n_transform regime")
    w = grid.weight
    zq, dens = _m_density_log(req, w, grid)
    return kernel_moment_log(w, z, zq, req.p, req.q,
                             dens + grid.log_weights, grid, table)


def n_transform(w: WeightSpec, req: TransformRequest, z,
                t: float | None = None):
    """Pointwise boundary statistic for q = infinity targets.

    N(z) = |g(psi z)| |psi'(z)| (1+phi'(z))^{-1} (1+phi'(psi z))^n
           * (omega(z)/omega(psi z))^{1/2} * laplacian_phi(psi z)^t,
    with t defaulting to the request's exponent.  Linear-scale result from a
    log-domain product; batched over z.
    """
    if t is None:
        t = req.t
    z_arr = np.atleast_1d(np.asarray(z, complex))
    zq = np.asarray(req.psi(z_arr))
    r, rq = np.abs(z_arr), np.abs(zq)
    log_om, l1p = _w_arrays(w, r)
    log_om_q, l1p_q = _w_arrays(w, rq)
    with np.errstate(divide="ignore"):
        log_g = np.log(np.abs(np.asarray(req.g(zq))))
        log_dpsi = np.log(np.abs(np.asarray(req.psi.derivative(z_arr))))
        log_lap_q = np.log(np.asarray(w.laplacian(rq), float))
    log_n = (log_g + log_dpsi - l1p + req.n * l1p_q
             + 0.5 * (log_om - log_om_q) + t * log_lap_q)
    out = np.exp(log_n).reshape(z_arr.shape)
    return out if np.ndim(z) else float(out[0])


def gv_transform(w: WeightSpec, psi: Symbol, g: Symbol, z,
                 grid: DiskQuadrature, q_exp: float = 2.0,
                 table: KernelTable | None = None):
    """log of int |k_{2,z}(psi xi)|^2 |g(xi)|^2 omega(xi) (1+phi'(xi))^{-q}
    dA(xi), the composition-Volterra Schatten integrand; q defaults to 2.

    Differs from the M family: g rides on the original variable and no
    psi-derivative enters.
    """
    zq = np.asarray(psi(grid.points))
    with np.errstate(divide="ignore"):
        log_g = np.log(np.abs(np.asarray(g(grid.points))))
    dens = (2.0 * log_g + grid.log_omega - q_exp * grid.log1p_phi_prime
            + grid.log_weights)
    return kernel_moment_log(w, z, zq, 2.0, 2.0, dens, grid, table)


def measure_moment(w: WeightSpec, mu: DiscreteMeasure, p: float, q: float, z,
                   omega_half: bool = False,
                   table: KernelTable | None = None):
    """log of int |k_{p,z}|^q [omega^{q/2}] d mu, batched over z."""
    z_arr = np.atleast_1d(np.asarray(z, complex))
    if mu.n_atoms == 0:
        out = np.full(z_arr.size, -math.inf)
        return out if np.ndim(z) else float(out[0])
    finite = mu.log_masses > -np.inf
    if not np.any(finite):
        out = np.full(z_arr.size, -math.inf)
        return out if np.ndim(z) else float(out[0])
    pts = mu.points[finite]
    extra = mu.log_masses[finite].copy()
    if omega_half:
        extra += 0.5 * q * np.asarray(w.log_omega(np.abs(pts)), float)
    rows = kernel_log_rows(w, z_arr, pts, p, table=table)
    out = np.asarray(logsumexp(q * rows + extra[None, :], axis=1),
                     float).reshape(z_arr.shape)
    return out if np.ndim(z) else float(out[0])


def berezin(w: WeightSpec, mu: DiscreteMeasure, t: float, z,
            table: KernelTable | None = None):
    """log G_t(mu)(z) = log int |k_{t,z}|^t omega^{t/2} d mu."""
    if not t > 0.0:
        raise ArgumentError(f"Berezin exponent t must be positive, got {t}")
    return measure_moment(w, mu, t, t, z, omega_half=True, table=table)


def averaging(w: WeightSpec, mu: DiscreteMeasure, delta: float, z):
    """mu(D_delta(z)) / tau(z)^2, the averaged measure; batched over z."""
    z_arr = np.atleast_1d(np.asarray(z, complex))
    tau = np.asarray(w.tau(np.abs(z_arr)), float)
    out = np.empty(z_arr.size)
    for i, zz in enumerate(z_arr.ravel()):
        lm = mu.log_mass_in_disk(complex(zz), delta * float(tau.ravel()[i]))
        out[i] = math.exp(lm) if lm > -math.inf else 0.0
    out = (out / tau.ravel() ** 2).reshape(z_arr.shape)
    return out if np.ndim(z) else float(out[0])


def sp_norm(w: WeightSpec, f: Symbol, p: float, grid: DiskQuadrature) -> float:
    """The symbol-space quasi-norm int |f|^p omega^{p/2} (1+phi')^{-p} dA,
    or the weighted sup at p = infinity."""
    if not p > 0.0:
        raise ArgumentError(f"exponent p must be positive, got {p}")
    with np.errstate(divide="ignore"):
        log_f = np.log(np.abs(np.asarray(f(grid.points))))
    core = log_f + 0.5 * grid.log_omega - grid.log1p_phi_prime
    if p == math.inf:
        return float(np.exp(np.max(core)))
    total = p * core + grid.log_weights
    m = float(np.max(total))
    if m == -np.inf:
        return 0.0
    return math.exp(m + math.log(float(np.sum(np.exp(total - m)))))


def ap_norm(w: WeightSpec, f: Symbol, p: float, grid: DiskQuadrature) -> float:
    """The space norm ||f||_{A^p}: (int |f|^p omega^{p/2} dA)^{1/p},
    or the weighted sup at p = infinity."""
    if not p > 0.0:
        raise ArgumentError(f"exponent p must be positive, got {p}")
    with np.errstate(divide="ignore"):
        log_f = np.log(np.abs(np.asarray(f(grid.points))))
    core = log_f + 0.5 * grid.log_omega
    if p == math.inf:
        return float(np.exp(np.max(core)))
    total = p * core + grid.log_weights
    m = float(np.max(total))
    if m == -np.inf:
        return 0.0
    return math.exp((m + math.log(float(np.sum(np.exp(total - m))))) / p)


def lp_norm(w: WeightSpec, f: Symbol, p: float, grid: DiskQuadrature,
            verbatim_constant: bool = False) -> float:
    """Derivative-based norm functional |f(0)|^p + int |f'|^p omega^{p/2}
    (1+phi')^{-p} dA, comparable to the p-th power of the space norm.

    ``verbatim_constant`` swaps in |f(0)| unpowered for comparison runs; the
    powered form is the homogeneous one.  p = infinity returns
    |f(0)| + sup |f'| omega^{1/2} (1+phi')^{-1}.
    """
    if not p > 0.0:
        raise ArgumentError(f"exponent p must be positive, got {p}")
    f0 = abs(complex(np.asarray(f(np.array([0.0 + 0.0j])))[0]))
    with np.errstate(divide="ignore"):
        log_df = np.log(np.abs(np.asarray(f.derivative(grid.points))))
    core = log_df + 0.5 * grid.log_omega - grid.log1p_phi_prime
    if p == math.inf:
        return f0 + float(np.exp(np.max(core)))
    total = p * core + grid.log_weights
    m = float(np.max(total))
    integral = 0.0 if m == -np.inf else math.exp(
        m + math.log(float(np.sum(np.exp(total - m)))))
    head = f0 if verbatim_constant else f0 ** p
    return head + integral


def embedding_function(w: WeightSpec, mu: DiscreteMeasure, p: float, q: float,
                       delta: float, z) -> np.ndarray:
    """F_{delta,mu}(z) = tau(z)^{-2q/p} int_{D_delta(z)} (1+phi')^q
    omega^{-q/2} d mu; tau exponent 2 when p = infinity."""
    z_arr = np.atleast_1d(np.asarray(z, complex))
    expo = 2.0 if p == math.inf else 2.0 * q / p
    nu = mu.nu_log_masses()
    tau = np.asarray(w.tau(np.abs(z_arr)), float).ravel()
    tree = mu.tree()
    out = np.empty(z_arr.size)
    flat = z_arr.ravel()
    for i, zz in enumerate(flat):
        idx = tree.query_ball_point([zz.real, zz.imag], delta * tau[i])
        if idx:
            out[i] = math.exp(float(logsumexp(nu[np.asarray(idx)]))
                              - expo * math.log(tau[i]))
        else:
            out[i] = 0.0
    return out.reshape(z_arr.shape)


def embedding_constant(w: WeightSpec, mu: DiscreteMeasure, p: float, q: float,
                       delta: float, lat: Lattice,
                       centers: np.ndarray | None = None) -> dict:
    """sup over lattice centers of the embedding disk functional.

    Returns the sup, the attaining center, and the number of centers with a
    nonempty disk.  Pass ``centers`` to restrict or refine the probe set.
    """
    zs = lat.centers if centers is None else np.asarray(centers, complex)
    vals = embedding_function(w, mu, p, q, delta, zs)
    if vals.size == 0:
        return {"constant": 0.0, "argmax": None, "n_active": 0}
    k = int(np.argmax(vals))
    return {
        "constant": float(vals[k]),
        "argmax": complex(zs[k]),
        "n_active": int(np.sum(vals > 0.0)),
    }
