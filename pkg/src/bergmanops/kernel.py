"""Reproducing kernel machinery: moments, batch evaluation, norms.

Everything rests on the moment sequence c_n = 2 int_0^1 r^(2n+1) omega dr.
The integrand peaks ever closer to the boundary as n grows, so the moments
are computed on a shared family of radial panels whose width tracks tau/2,
extended until 2*phi reaches 1400; by then the integrand has decayed far
below any double-precision contribution for every admissible degree.  All
panel sums run in the log domain and are verified against a half-width
refinement at build time.

Kernel values are assembled as a scaled complex matrix product: row factors
conj(z)^n / sqrt(c_n), column factors zeta^n / sqrt(c_n), each kept below
the overflow line by optional log-scale offsets per row and column.  The
natural offsets (normalizing row kernels, damping columns by omega^(1/2))
make every intermediate quantity polynomially bounded, which is how the
transform and operator layers call in.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (AccuracyError, ArgumentError, DomainError,
                     NumericalError, ResourceError)
from .quadrature import DiskQuadrature
from .weights import BandReport, WeightSpec

__all__ = [
    "KernelTable",
    "get_table",
    "required_degree",
    "kernel_eval",
    "kernel_matrix",
    "kernel_diag_log",
    "kernel_norm_log",
    "kernel_norm_band",
    "normalized_log_scales",
    "surrogate_values",
    "lp_log_d2",
    "export_moments",
]

DEGREE_CAP = 20000
MOMENT_DEPTH = 700.0        # panels stop once phi exceeds this
MOMENT_REFINE_TOL = 1e-10   # log-domain agreement between panel densities
PANEL_ORDER = 24

_LOG_ZERO = -1.0e8          # stand-in for log 0 that stays NaN-free under n*x

_gauss_cache: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def _gauss(order: int) -> tuple[np.ndarray, np.ndarray]:
    rule = _gauss_cache.get(order)
    if rule is None:
        rule = np.polynomial.legendre.leggauss(order)
        _gauss_cache[order] = rule
    return rule


def _radial_panels(w: WeightSpec, density: float) -> tuple[np.ndarray, np.ndarray]:
    """Panel nodes and log(gauss weight) on [0, r_hi], width tau/(2 density)."""
    r_hi = w.phi_level_radius(MOMENT_DEPTH)
    edges = [0.0]
    while edges[-1] < r_hi:
        r0 = edges[-1]
        h = float(w.tau(min(r0, r_hi))) / (2.0 * density)
        h = float(w.tau(min(r0 + 0.5 * h, r_hi))) / (2.0 * density)
        edges.append(min(r0 + h, r_hi))
        if len(edges) > 100_000:
            raise ResourceError("radial panel subdivision did not terminate")
    edges = np.array(edges)
    x, gw = _gauss(PANEL_ORDER)
    lo, hi = edges[:-1][:, None], edges[1:][:, None]
    r = (0.5 * (hi - lo) * x[None, :] + 0.5 * (hi + lo)).ravel()
    log_gw = np.log((gw[None, :] * 0.5 * (hi - lo)).ravel())
    return r, log_gw


def _panel_log_moments(log_r: np.ndarray, base: np.ndarray,
                       exps: np.ndarray) -> np.ndarray:
    """log of sum_j exp(exps_i * log_r_j + base_j), chunked over i."""
    out = np.empty(exps.size)
    for s in range(0, exps.size, 512):
        e = exps[s:s + 512, None]
        m = e * log_r[None, :] + base[None, :]
        shift = np.max(m, axis=1, keepdims=True)
        out[s:s + 512] = (np.log(np.sum(np.exp(m - shift), axis=1))
                          + shift[:, 0])
    return out


@dataclass
class KernelTable:
    """Cached log-moments of a weight up to a fixed degree."""

    weight: WeightSpec
    degree: int
    log_c: np.ndarray
    _log_d2: np.ndarray | None = field(default=None, repr=False)

    def extend(self, degree: int) -> "KernelTable":
        """A table covering at least ``degree``; self if already large enough."""
        if degree <= self.degree:
            return self
        return _build_table(self.weight, degree)

    @property
    def log_d2(self) -> np.ndarray:
        """Diagonal pairing weights of the derivative-based basis.

        d_0 = 1 and d_n^2 = n^2 * 2 int r^(2n-1) omega (1+phi')^(-2) dr,
        the norm of z^n under the pairing <f, g> = f(0) conj(g(0)) +
        int f' conj(g') omega (1+phi')^(-2) dA.
        """
        if self._log_d2 is None:
            self._log_d2 = _build_log_d2(self.weight, self.degree)
        return self._log_d2


def _moments_at_density(w: WeightSpec, degree: int, density: float,
                        lp: bool = False) -> np.ndarray:
    r, log_gw = _radial_panels(w, density)
    log_radius = np.log(r)
    base = -2.0 * np.asarray(w.phi(r), float) + log_gw
    if lp:
        base = base - 2.0 * np.asarray(w.log1p_phi_prime(r), float)
        exps = 2.0 * np.arange(1, degree + 1, dtype=float) - 1.0
    else:
        exps = 2.0 * np.arange(degree + 1, dtype=float) + 1.0
    return _panel_log_moments(log_radius, base, exps) + math.log(2.0)


def _build_table(w: WeightSpec, degree: int) -> KernelTable:
    if degree > DEGREE_CAP:
        raise ResourceError(f"degree {degree} exceeds cap {DEGREE_CAP}")
    coarse = _moments_at_density(w, degree, 1.0)
    fine = _moments_at_density(w, degree, 2.0)
    err = float(np.max(np.abs(fine - coarse)))
    if err > MOMENT_REFINE_TOL:
        raise AccuracyError("moment panels did not converge under refinement",
                            achieved=err, target=MOMENT_REFINE_TOL)
    return KernelTable(weight=w, degree=degree, log_c=fine)


def _build_log_d2(w: WeightSpec, degree: int) -> np.ndarray:
    coarse = _moments_at_density(w, degree, 1.0, lp=True)
    fine = _moments_at_density(w, degree, 2.0, lp=True)
    err = float(np.max(np.abs(fine - coarse)))
    if err > MOMENT_REFINE_TOL:
        raise AccuracyError("pairing-moment panels did not converge",
                            achieved=err, target=MOMENT_REFINE_TOL)
    n = np.arange(1, degree + 1, dtype=float)
    out = np.empty(degree + 1)
    out[0] = 0.0
    out[1:] = 2.0 * np.log(n) + fine
    return out


_table_cache: dict[WeightSpec, KernelTable] = {}


def get_table(w: WeightSpec, degree: int) -> KernelTable:
    """Shared per-weight moment table, grown in powers of two."""
    tab = _table_cache.get(w)
    if tab is None or tab.degree < degree:
        target = 512
        while target < degree:
            target *= 2
        target = min(target, DEGREE_CAP)
        if target < degree:
            raise ResourceError(f"degree {degree} exceeds cap {DEGREE_CAP}")
        tab = _build_table(w, target)
        _table_cache[w] = tab
    return tab


def required_degree(w: WeightSpec, rho: float, tol: float = 1e-18,
                    cap: int = DEGREE_CAP) -> int:
    """Smallest degree whose tail contributes below tol at |z zeta| <= rho^2.

    The term sequence rho^(2n)/c_n rises to a single peak (log c_n is
    convex) and then decays with a monotone ratio, so the geometric tail
    bound past the peak is rigorous.
    """
    if not 0.0 <= rho < 1.0:
        raise DomainError(f"rho {rho} outside [0, 1)")
    if rho == 0.0:
        return 0
    degree = 512
    while True:
        tab = get_table(w, min(degree, cap))
        n = np.arange(tab.degree + 1, dtype=float)
        log_t = 2.0 * n * math.log(rho) - tab.log_c
        peak = int(np.argmax(log_t))
        log_peak = float(log_t[peak])
        found = None
        for m in range(max(peak, 1), tab.degree):
            ratio = math.exp(min(log_t[m + 1] - log_t[m], -1e-16))
            if ratio < 1.0:
                log_tail = log_t[m] + math.log(ratio / (1.0 - ratio))
                if log_tail <= math.log(tol) + log_peak:
                    found = m
                    break
        if found is not None:
            if found > cap:
                raise ResourceError(
                    f"kernel tail at rho={rho} needs degree {found}, "
                    f"cap is {cap}")
            return found
        if tab.degree >= cap:
            raise ResourceError(
                f"kernel tail at rho={rho} needs degree beyond cap {cap}")
        degree = tab.degree * 2


def _safe_log_abs(z: np.ndarray) -> np.ndarray:
    a = np.abs(z)
    with np.errstate(divide="ignore"):
        la = np.log(a)
    return np.where(a > 0.0, la, _LOG_ZERO)


def kernel_matrix(table: KernelTable, z: np.ndarray, zeta: np.ndarray,
                  log_row_scale: np.ndarray | float = 0.0,
                  log_col_scale: np.ndarray | float = 0.0,
                  degree: int | None = None) -> np.ndarray:
    """Scaled kernel values exp(row+col scales) * K_{z_i}(zeta_j).

    Computed as a complex matrix product of power factors split evenly
    between the two arguments.  Scales must keep the factors finite: the
    peak exponent per row/column is checked and a NumericalError names the
    offending side so callers can fold in normalization or weight damping.
    """
    z = np.atleast_1d(np.asarray(z, complex))
    zeta = np.atleast_1d(np.asarray(zeta, complex))
    if degree is None:
        ra = float(np.max(np.abs(z))) if z.size else 0.0
        rb = float(np.max(np.abs(zeta))) if zeta.size else 0.0
        rho = math.sqrt(ra * rb)
        degree = required_degree(table.weight, rho)
    table = table.extend(degree)
    n = np.arange(degree + 1, dtype=float)
    half = 0.5 * table.log_c[:degree + 1]

    row_log = _safe_log_abs(z)[:, None] * n[None, :] - half[None, :] \
        + np.asarray(log_row_scale, float).reshape(-1, 1)
    col_log = _safe_log_abs(zeta)[:, None] * n[None, :] - half[None, :] \
        + np.asarray(log_col_scale, float).reshape(-1, 1)
    peak = float(np.max(row_log)) + float(np.max(col_log))
    if peak > 690.0:
        raise NumericalError(
            f"kernel factors would overflow (joint peak exponent {peak:.0f});"
            " supply log_row_scale / log_col_scale")
    V = np.exp(row_log - 1j * np.angle(z)[:, None] * n[None, :])
    U = np.exp(col_log + 1j * np.angle(zeta)[:, None] * n[None, :])
    return V @ U.T


def kernel_eval(w: WeightSpec, z: complex, zeta: complex,
                table: KernelTable | None = None) -> complex:
    """Single kernel value K_z(zeta); convenience wrapper for tests."""
    rho = math.sqrt(abs(z) * abs(zeta))
    deg = required_degree(w, rho)
    tab = table.extend(deg) if table is not None else get_table(w, deg)
    return complex(kernel_matrix(tab, np.array([z]), np.array([zeta]),
                                 degree=deg)[0, 0])


def kernel_diag_log(w: WeightSpec, z: np.ndarray,
                    table: KernelTable | None = None) -> np.ndarray:
    """log K_z(z), the squared Bergman norm of K_z, batched over z."""
    z = np.atleast_1d(np.asarray(z, complex))
    r = np.abs(z)
    rho = float(np.max(r)) if r.size else 0.0
    deg = required_degree(w, rho)
    tab = table.extend(deg) if table is not None else get_table(w, deg)
    n = np.arange(deg + 1, dtype=float)
    expo = 2.0 * _safe_log_abs(z)[:, None] * n[None, :] - tab.log_c[None, :deg + 1]
    shift = np.max(expo, axis=1, keepdims=True)
    return (np.log(np.sum(np.exp(expo - shift), axis=1)) + shift[:, 0])


def _norm_scan_radii(w: WeightSpec, n_points: int = 1500) -> np.ndarray:
    r_hi = min(w.r_max_guard, w.r_table_max)
    u = np.linspace(0.0, 1.0, n_points)
    return r_hi * (1.0 - (1.0 - u) ** 2)  # cluster toward the boundary


def kernel_norm_log(w: WeightSpec, z: complex, p: float,
                    grid: DiskQuadrature | None = None,
                    table: KernelTable | None = None) -> float:
    """log of the A^p norm of K_z.

    p = 2 reads the diagonal; p = inf takes the weighted sup along a radial
    scan (coefficients are positive, so the sup sits on the aligned ray);
    other p integrate |K_z omega^(1/2)|^p over a supplied grid.
    """
    if p == 2.0:
        return 0.5 * float(kernel_diag_log(w, np.array([z]), table)[0])
    r = abs(z)
    if p == math.inf:
        scan = _norm_scan_radii(w)
        deg = required_degree(w, math.sqrt(r * float(scan[-1])))
        tab = table.extend(deg) if table is not None else get_table(w, deg)
        n = np.arange(deg + 1, dtype=float)
        expo = (_safe_log_abs(scan.astype(complex))[:, None] + math.log(r)
                if r > 0 else np.full((scan.size, 1), _LOG_ZERO))
        expo = expo * n[None, :] - tab.log_c[None, :deg + 1]
        shift = np.max(expo, axis=1, keepdims=True)
        vals = np.log(np.sum(np.exp(expo - shift), axis=1)) + shift[:, 0]
        vals = vals - np.asarray(w.phi(scan), float)
        return float(np.max(vals))
    if grid is None:
        raise ArgumentError(f"kernel_norm_log with p={p} needs a grid")
    if p <= 0.0:
        raise ArgumentError(f"exponent p must be positive, got {p}")
    deg = required_degree(w, math.sqrt(r * grid.r_cut))
    tab = table.extend(deg) if table is not None else get_table(w, deg)
    row = kernel_matrix(tab, np.array([z]), grid.points,
                        log_col_scale=0.5 * grid.log_omega, degree=deg)[0]
    log_row = _safe_log_abs(row)
    total = p * log_row + grid.log_weights
    m = float(np.max(total))
    if m == -np.inf:
        return -math.inf
    return (m + math.log(float(np.sum(np.exp(total - m))))) / p


def kernel_norm_band(w: WeightSpec, p: float, radii: np.ndarray,
                     grid: DiskQuadrature | None = None) -> BandReport:
    """Ratio of ||K_z||_p to omega^(-1/2) tau^(2(1-p)/p) along radii.

    For p = inf the comparison function is omega^(-1/2) tau^(-2).
    """
    radii = np.asarray(radii, float)
    vals = np.empty(radii.size)
    for i, r in enumerate(radii):
        ln = kernel_norm_log(w, complex(r), p, grid=grid)
        phi = float(w.phi(np.array([r]))[0])
        tau = float(w.tau(np.array([r]))[0])
        expo = -2.0 if p == math.inf else 2.0 * (1.0 - p) / p
        vals[i] = math.exp(ln - phi - expo * math.log(tau))
    return BandReport(radii=radii, values=vals,
                      low=float(np.min(vals)), high=float(np.max(vals)))


def normalized_log_scales(w: WeightSpec, z: np.ndarray, p: float,
                          grid: DiskQuadrature | None = None,
                          table: KernelTable | None = None) -> np.ndarray:
    """Per-point -log ||K_z||_p, the row scales that normalize kernels."""
    z = np.atleast_1d(np.asarray(z, complex))
    if p == 2.0:
        return -0.5 * kernel_diag_log(w, z, table)
    return -np.array([kernel_norm_log(w, complex(zz), p, grid, table)
                      for zz in z])


def surrogate_values(w: WeightSpec, a: complex, zeta: np.ndarray,
                     table: KernelTable | None = None) -> np.ndarray:
    """tau(a) times the L^2-normalized kernel at a, evaluated at zeta.

    A unit-scale test function concentrated on the tau-disk at a; its
    A^2 norm is tau(a).
    """
    zeta = np.atleast_1d(np.asarray(zeta, complex))
    r_zeta = float(np.max(np.abs(zeta))) if zeta.size else 0.0
    deg = required_degree(w, math.sqrt(abs(a) * r_zeta))
    tab = table.extend(deg) if table is not None else get_table(w, deg)
    scale = math.log(float(w.tau(np.array([abs(a)]))[0])) \
        - 0.5 * float(kernel_diag_log(w, np.array([a]), tab)[0])
    out = np.empty(zeta.shape, dtype=complex)
    block = max(1, 4_000_000 // (deg + 1))
    for s in range(0, zeta.size, block):
        out[s:s + block] = kernel_matrix(tab, np.array([a]), zeta[s:s + block],
                                         log_row_scale=scale, degree=deg)[0]
    return out


def lp_log_d2(w: WeightSpec, degree: int) -> np.ndarray:
    """log d_n^2 for the derivative pairing; see KernelTable.log_d2."""
    return get_table(w, degree).log_d2[:degree + 1]


def export_moments(table: KernelTable, path: str) -> None:
    """Write one line per moment: n log_c_n."""
    data = np.column_stack([np.arange(table.degree + 1, dtype=float),
                            table.log_c])
    np.savetxt(path, data, fmt=["%d", "%.17g"])
