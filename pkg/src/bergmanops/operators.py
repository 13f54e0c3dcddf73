"""Truncated matrices of the integration-composition operators.

Monomials are orthogonal under every radial pairing used here, so both
working bases are scaled monomials: the standard basis z^n/sqrt(c_n) and
the derivative-pairing basis z^n/d_n.  The image of a basis monomial under
any of the six operators is computed by exact polynomial arithmetic: the
symbols are truncated once (tail below 1e-14), the integrand is a
polynomial product, the antiderivative is exact in the coefficients, and
composition with psi is a truncated Horner sweep whose retained
coefficients are exact for the truncated psi.  Matrix entries then come
from coefficient extraction against the diagonal Gram, no quadrature.

The Toeplitz block is the other route to the same quadratic form: a
discrete sesquilinear sum over measure atoms.  Comparing the two is the
operator-level consistency check, and the quadrature grid is the only
shared ingredient.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import svdvals

from .errors import (ArgumentError, NumericalError, PreconditionError,
                     ResourceError, TruncationError)
from .kernel import get_table
from .quadrature import DiscreteMeasure, DiskQuadrature, build_grid, logsumexp
from .symbols import Symbol
from .weights import WeightSpec

__all__ = [
    "OperatorMatrix",
    "SpectralSummary",
    "OP_KIND_NAMES",
    "build_operator",
    "build_toeplitz",
    "spectral_summary",
    "toeplitz_identity_check",
    "export_matrix",
]

OP_KIND_NAMES = ("C_psi_g", "C_g_psi", "GI", "GV", "J", "I")
BASIS_NAMES = ("standard", "littlewood_paley")

ENTRY_BUDGET = 8192          # N * (deg psi + deg g) ceiling
SYMBOL_TAIL_TOL = 1e-14
SYMBOL_TRUNC_RADIUS = 0.995
TRAILING_REL_TOL = 1e-12     # negligible-rows criterion for the row cutoff


@dataclass
class OperatorMatrix:
    """Rectangular truncation: columns are basis inputs, rows outputs."""

    entries: np.ndarray
    basis: str
    truncation: int           # number of input basis elements
    op_tag: str
    weight: WeightSpec

    @property
    def n_rows(self) -> int:
        return self.entries.shape[0]

    def square(self) -> np.ndarray:
        """Leading truncation x truncation block."""
        n = self.truncation
        out = np.zeros((n, n), dtype=complex)
        m = min(n, self.entries.shape[0])
        out[:m] = self.entries[:m, :n]
        return out


@dataclass
class SpectralSummary:
    singular_values: np.ndarray
    op_norm: float
    schatten: dict
    tail_trend: list = field(default_factory=list)


def _truncate_symbol(sym: Symbol, label: str) -> np.ndarray:
    try:
        coeffs = sym.truncate_to(SYMBOL_TRUNC_RADIUS, tol=SYMBOL_TAIL_TOL)
    except TruncationError as exc:
        raise TruncationError(
            f"symbol {label} not truncatable to tolerance "
            f"{SYMBOL_TAIL_TOL} at radius {SYMBOL_TRUNC_RADIUS}: {exc}",
            tail_bound=getattr(exc, "tail_bound", math.inf))
    return np.asarray(coeffs, dtype=complex)


def _mul_trunc(a: np.ndarray, b: np.ndarray, m_max: int) -> np.ndarray:
    """Product coefficients through degree m_max; exact for those degrees."""
    full = np.convolve(a, b)
    return full[:m_max + 1]


def _antiderivative(p: np.ndarray) -> np.ndarray:
    out = np.zeros(p.size + 1, dtype=complex)
    out[1:] = p / np.arange(1, p.size + 1)
    return out


def _compose_trunc(h: np.ndarray, psi_c: np.ndarray, m_max: int) -> np.ndarray:
    """(h o psi) mod z^(m_max+1), Horner over h's coefficients."""
    acc = np.zeros(1, dtype=complex)
    for c in h[::-1]:
        acc = _mul_trunc(acc, psi_c, m_max)
        if acc.size == 0:
            acc = np.zeros(1, dtype=complex)
        acc[0] += c
    return acc


def _basis_log_norms(w: WeightSpec, basis: str, count: int) -> np.ndarray:
    """log of the Gram diagonal norm of z^n in the chosen pairing."""
    tab = get_table(w, count - 1 if count > 1 else 1)
    if basis == "standard":
        return 0.5 * tab.log_c[:count]
    if basis == "littlewood_paley":
        return 0.5 * tab.log_d2[:count]
    raise ArgumentError(f"basis must be one of {BASIS_NAMES}")


def _is_identity(coeffs: np.ndarray) -> bool:
    return (coeffs.size == 2 and coeffs[0] == 0 and coeffs[1] == 1.0)


def _raw_columns(kind: str, psi_c: np.ndarray, g_c: np.ndarray, n_cols: int,
                 m_max: int) -> np.ndarray:
    """Coefficients of T(z^n) for n < n_cols, rows 0..m_max."""
    cols = np.zeros((m_max + 1, n_cols), dtype=complex)
    if kind in ("C_psi_g", "C_g_psi"):
        # T z^n = H_n(psi(z)), H_n the exact antiderivative of the integrand
        for n in range(n_cols):
            if kind == "C_psi_g":
                if n == 0:
                    continue  # derivative of a constant
                mono = np.concatenate([np.zeros(n - 1, complex), [n]])
            else:
                mono = np.concatenate([np.zeros(n, complex), [1.0]])
            h = _antiderivative(np.convolve(mono, g_c))
            if _is_identity(psi_c):
                k = min(h.size, m_max + 1)
                cols[:k, n] = h[:k]
            else:
                comp = _compose_trunc(h, psi_c, m_max)
                cols[:comp.size, n] = comp
        return cols
    if kind in ("GI", "GV"):
        # psi powers built incrementally, truncated at the output degree
        power = np.ones(1, dtype=complex)  # psi^n for the current n
        for n in range(n_cols):
            if kind == "GV":
                integrand = _mul_trunc(power, g_c, m_max)
            else:
                integrand = np.zeros(1, complex) if n == 0 else \
                    _mul_trunc((n + 0.0) * prev_power, g_c, m_max)
            h = _antiderivative(integrand)[:m_max + 1]
            cols[:h.size, n] = h
            prev_power = power
            power = _mul_trunc(power, psi_c, m_max)
        return cols
    raise ArgumentError(f"unknown operator kind {kind!r}")


def build_operator(kind: str, psi: Symbol, g: Symbol, w: WeightSpec, N: int,
                   basis: str = "standard",
                   m_out: int | None = None) -> OperatorMatrix:
    """Matrix of the chosen operator on the first N basis monomials.

    Rows run to the smallest degree that captures every non-negligible
    output coefficient (exact for polynomial psi; verified by a trailing
    block check otherwise, growing the row count as needed).
    """
    if kind not in OP_KIND_NAMES:
        raise ArgumentError(f"kind must be one of {OP_KIND_NAMES}")
    if N < 1:
        raise ArgumentError("need at least one basis element")
    if kind in ("J", "I"):
        psi = Symbol.identity()
        kind = "C_g_psi" if kind == "J" else "C_psi_g"
    sm = psi.self_map_check()
    if not sm.ok:
        raise PreconditionError(
            f"psi is not a certified self-map (sup modulus {sm.sup_modulus})")
    psi_c = _truncate_symbol(psi, "psi")
    g_c = _truncate_symbol(g, "g")
    deg_psi, deg_g = psi_c.size - 1, g_c.size - 1
    if N * (max(deg_psi, 1) + deg_g) > ENTRY_BUDGET:
        raise ResourceError(
            f"N*(deg psi + deg g) = {N * (max(deg_psi, 1) + deg_g)} "
            f"exceeds budget {ENTRY_BUDGET}")

    psi_poly = psi.kind == "polynomial" or _is_identity(psi_c)
    exact_m = (N + deg_g + 1) * max(deg_psi, 1) + 1
    if m_out is None:
        m_out = exact_m if psi_poly else min(exact_m, max(4 * N + 64, 192))

    tag = f"{kind}(psi={psi.to_spec()}, g={g.to_spec()})"
    for _ in range(6):
        cols = _raw_columns(kind, psi_c, g_c, N, m_out)
        if psi_poly or m_out >= exact_m:
            break
        tail = np.linalg.norm(cols[-max(m_out // 8, 8):])
        total = np.linalg.norm(cols)
        if total == 0.0 or tail <= TRAILING_REL_TOL * total:
            break
        m_out = min(2 * m_out, exact_m)
    else:
        raise NumericalError(f"row cutoff did not stabilize for {tag}")

    log_norms = _basis_log_norms(w, basis, max(m_out + 1, N))
    # entry (m,n) = coeff_m(T z^n) * ||z^m|| / ||z^n||
    scale = np.exp(log_norms[:m_out + 1][:, None] - log_norms[:N][None, :])
    entries = cols * scale
    if not np.all(np.isfinite(entries)):
        raise NumericalError(f"non-finite matrix entries for {tag}")
    return OperatorMatrix(entries=entries, basis=basis, truncation=N,
                          op_tag=tag, weight=w)


def build_toeplitz(mu: DiscreteMeasure, w: WeightSpec, N: int,
                   basis: str = "littlewood_paley",
                   chunk: int = 200_000) -> OperatorMatrix:
    """Discrete sesquilinear form B[m,n] = sum_atoms b_n(a) conj(b_m(a)) mass.

    The measure is expected to carry omega already (pullback masses do), so
    no extra pairing weight enters.  Atoms stream through in chunks; each
    chunk contributes a rank-revealing outer product.
    """
    log_norms = _basis_log_norms(w, basis, N)
    B = np.zeros((N, N), dtype=complex)
    n_idx = np.arange(N, dtype=float)
    pts, masses = mu.points, mu.log_masses
    for s in range(0, pts.size, chunk):
        at = pts[s:s + chunk]
        lm = masses[s:s + chunk]
        keep = lm > -np.inf
        at, lm = at[keep], lm[keep]
        if at.size == 0:
            continue
        la = np.where(np.abs(at) > 0, np.log(np.abs(at).clip(1e-300)), -1e8)
        expo = n_idx[:, None] * la[None, :] - log_norms[:, None] \
            + 0.5 * lm[None, :]
        E = np.exp(expo + 1j * n_idx[:, None] * np.angle(at)[None, :])
        B += E.conj() @ E.T
    if not np.all(np.isfinite(B)):
        raise NumericalError("Toeplitz entries overflowed")
    return OperatorMatrix(entries=B, basis=basis, truncation=N,
                          op_tag=f"toeplitz({mu.provenance})", weight=w)


def spectral_summary(mat: OperatorMatrix,
                     p_list: tuple = (1.0, 2.0)) -> SpectralSummary:
    """Singular values, operator norm, Schatten norms, tail norms."""
    A = mat.entries
    try:
        s = svdvals(A) if A.size else np.zeros(0)
    except np.linalg.LinAlgError as exc:  # pragma: no cover
        raise NumericalError(f"SVD failed for {mat.op_tag}") from exc
    op = float(s[0]) if s.size else 0.0
    schatten = {}
    for p in p_list:
        if not p > 0.0:
            raise ArgumentError(f"Schatten exponent must be positive: {p}")
        schatten[p] = float(np.sum(s ** p) ** (1.0 / p)) if s.size else 0.0
    N = mat.truncation
    trend = []
    for m in (N // 4, N // 2, (3 * N) // 4):
        if 0 < m < N:
            sub = A[m:, m:]
            tail = float(svdvals(sub)[0]) if sub.size else 0.0
            trend.append({"m": m, "op_norm": tail})
    return SpectralSummary(singular_values=s, op_norm=op,
                           schatten=schatten, tail_trend=trend)


def _circle_sup(fn, r: float, n: int = 512) -> float:
    z = r * np.exp(2j * np.pi * np.arange(n) / n)
    return float(np.max(np.abs(np.asarray(fn(z)))))


def _deep_r_cut(w: WeightSpec, psi: Symbol, g: Symbol, N: int,
                log_norms: np.ndarray) -> float:
    """Radius where the Toeplitz integrand majorant drops 28 logs below its
    peak, so truncating there is invisible at 1e-8."""
    guard = min(w.r_max_guard * 0.9999, w.r_table_max)
    rr = np.linspace(0.5, guard, 300)
    total = np.empty(rr.size)
    n_idx = np.arange(N, dtype=float)
    for i, r in enumerate(rr):
        ps = min(psi.sup_on_radius(r), guard)
        gs = _circle_sup(lambda z: g(psi(z)), r)
        ds = _circle_sup(psi.derivative, r)
        growth = float(np.max(2.0 * n_idx * math.log(max(ps, 1e-12))
                              - 2.0 * log_norms[:N]))
        dens = (2.0 * math.log(max(gs, 1e-300))
                + 2.0 * math.log(max(ds, 1e-300))
                + float(w.log_omega(np.array([r]))[0])
                - 2.0 * float(w.log1p_phi_prime(np.array([r]))[0]))
        total[i] = growth + dens
    peak = float(np.max(total))
    # first radius past the peak where the majorant sits e^64 below it
    i_peak = int(np.argmax(total))
    for i in range(i_peak, rr.size):
        if total[i] <= peak - 64.0:
            return float(rr[i])
    return guard


def toeplitz_identity_check(psi: Symbol, g: Symbol, w: WeightSpec, N: int,
                            grid: DiskQuadrature | None = None) -> dict:
    """Compare A*A against the Toeplitz form of the pulled-back measure.

    A is the operator matrix of the plain composition-integration operator
    in the derivative-pairing basis; B is the discrete sesquilinear form of
    the measure with density |g(psi)|^2 |psi'|^2 omega (1+phi')^{-2}.  The
    value-at-zero pairing term contributes a rank-one piece R (nonzero only
    when psi(0) != 0), reported separately; the main figure compares
    A*A with B + R.
    """
    from .quadrature import pullback_measure

    A = build_operator("C_g_psi", psi, g, w, N, basis="littlewood_paley")
    log_norms = _basis_log_norms(w, "littlewood_paley", max(N, 2))
    if grid is None:
        r_deep = _deep_r_cut(w, psi, g, N, log_norms)
        grid = build_grid(w, r_deep, density=1.5)
    mu = pullback_measure(w, psi, g, 2.0, grid)
    B = build_toeplitz(mu, w, N, basis="littlewood_paley").entries
    G = A.entries.conj().T @ A.entries
    v = A.entries[0, :]               # values at zero in the LP pairing
    R = v.conj()[:, None] * v[None, :]
    denom = float(np.linalg.norm(B + R))
    if denom == 0.0:
        err = float(np.linalg.norm(G - B - R))
        return {"frobenius_rel_err": err, "rank_one_share": 0.0,
                "r_cut": grid.r_cut, "N": N}
    return {
        "frobenius_rel_err": float(np.linalg.norm(G - B - R)) / denom,
        "rank_one_share": float(np.linalg.norm(R)) / denom,
        "r_cut": grid.r_cut,
        "N": N,
    }


def export_matrix(mat: OperatorMatrix, path: str) -> None:
    """Write entries as text lines: m n re im."""
    M, N = mat.entries.shape
    with open(path, "w") as fh:
        for m in range(M):
            for n in range(N):
                v = mat.entries[m, n]
                fh.write(f"{m} {n} {v.real:.17g} {v.imag:.17g}\n")
