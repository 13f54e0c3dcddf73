"""Boundedness, compactness and Schatten-class decision procedures.

Each check turns an integral criterion into a finite computation and then
into a verdict by trend analysis: statistics are evaluated on tau-adapted
boundary shells, and a quantity is declared essentially bounded only when
its shell maxima have stopped growing well inside the truncation radius.
Integrability criteria (the L^s(d lambda) routes) are decided by domain
refinement: the statistic over |z| < r_cut is compared with its value on
the nested domain with twice the boundary distance, and the growth factor
classifies the integral as converged or divergent.  Anything without a
clear trend is reported inconclusive rather than forced into a verdict.

Three route families:
  A  sup of the M transform (q >= p, both finite),
  B  L^s(d lambda) norm of the M transform (q < p), where boundedness and
     compactness coincide,
  C  sup of the pointwise N transform (q = infinity).
Schatten membership runs through the q = 2 kernel moment (or its
composition-Volterra variant) in L^{p/2}(d lambda), with the rigidity
shortcut for p <= 1 in the identity case.

Kernel moments near the truncation edge lose the outer part of their
mass, so the integration grid always reaches beyond the probe domain
(inner_stretch); the residual edge damping only pushes borderline cases
toward inconclusive, never toward a false divergence.

Spectral cross-checks are opt-in: truncated matrices only say anything on
the p = q = 2 Hilbert space, and a verdict that contradicts its own matrix
ladder is downgraded to inconclusive, never silently kept.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ArgumentError, PreconditionError, ResourceError, TruncationError
from .operators import build_operator, spectral_summary
from .quadrature import (DiskQuadrature, build_grid, build_probe_grid,
                         lambda_norm_log, tau_ladder)
from .symbols import Symbol
from .transforms import TransformRequest, gv_transform, m_transform, n_transform
from .weights import WeightSpec

__all__ = [
    "CheckConfig",
    "CriterionReport",
    "check_boundedness",
    "check_compactness",
    "check_schatten",
    "necessary_condition",
    "id_case_panel",
    "VERDICTS",
]

VERDICTS = ("bounded", "unbounded", "compact", "not_compact",
            "in_Sp", "not_in_Sp", "inconclusive")

# trend thresholds; see the module docstring for what they decide
TREND_WINDOW = 5          # shells that must be non-increasing for "bounded"
FIT_WINDOW = 8            # shells entering the log-slope fit
SLOPE_MIN = 0.05          # per-shell log-slope above which growth is divergence
INTERIOR_MARGIN = 3       # global max must sit this many shells inside r_cut
LIMIT_WINDOW = 8          # decreasing window for the "limit = 0" rule
LIMIT_RATIO = 1e-3        # final shell must be below this times the interior max
COARSE_FACTOR = 2.0       # nested domain has this multiple of 1 - r_cut
GROWTH_STABLE = 1.5       # domain-refinement growth below this is convergence
GROWTH_DIVERGENT = 2.0    # growth at or above this is divergence
SATURATION_REL = 0.10     # op-norm ladder increment defining saturation
VACUITY_MARGIN = 0.999    # sup|psi| below this empties the |psi(z)| -> 1 limit

CHECK_KINDS = ("C_psi_g", "C_g_psi")
SCHATTEN_KINDS = ("C_g_psi", "GV")
_ID_ALIAS = {"I": "C_psi_g", "J": "C_g_psi"}


@dataclass(frozen=True)
class CheckConfig:
    """Resolution knobs shared by all checks.

    r_cut bounds the probe domain; shell statistics ride a tau ladder of
    shell_density.  Inner integration grids reach beyond the probes
    (1 - r_cut shrunk by inner_stretch) so kernel moments near r_cut keep
    their local mass; integral statistics use the cheaper integral_density
    there since the growth classification needs only percent-level values.
    refine switches the nested-domain growth comparison; crosscheck the
    truncated-matrix ladder (off by default: only meaningful on the
    p = q = 2 space and costs an SVD per rung).
    """

    r_cut: float = 0.95
    grid_density: float = 1.0
    shell_density: float = 1.5
    probe_density: float = 0.45
    integral_density: float = 0.6
    inner_stretch: float = 0.75
    n_angles: int = 16
    refine: bool = True
    crosscheck: bool = False
    ladder: tuple[int, ...] = (16, 32, 64, 128)

    def __post_init__(self):
        if not 0.0 < self.r_cut < 1.0:
            raise ArgumentError(f"r_cut must lie in (0, 1), got {self.r_cut}")
        if not 0.0 < self.inner_stretch <= 1.0:
            raise ArgumentError("inner_stretch must lie in (0, 1]")
        if self.n_angles < 1:
            raise ArgumentError("n_angles must be at least 1")
        if len(self.ladder) < 2:
            raise ArgumentError("crosscheck ladder needs at least two rungs")

    @property
    def inner_r_cut(self) -> float:
        return 1.0 - self.inner_stretch * (1.0 - self.r_cut)

    @property
    def coarse_r_cut(self) -> float:
        return max(1.0 - COARSE_FACTOR * (1.0 - self.r_cut), 0.5 * self.r_cut)

    def echo(self) -> dict:
        return {
            "r_cut": self.r_cut,
            "grid_density": self.grid_density,
            "shell_density": self.shell_density,
            "probe_density": self.probe_density,
            "integral_density": self.integral_density,
            "inner_stretch": self.inner_stretch,
            "n_angles": self.n_angles,
            "refine": self.refine,
            "crosscheck": self.crosscheck,
            "ladder": list(self.ladder),
        }


@dataclass
class CriterionReport:
    """Verdict plus the evidence that produced it.

    shells pairs each shell radius with the shell maximum of the decided
    statistic; growth is the domain-refinement factor where one was run.
    notes carry surfaced anomalies (crosscheck conflicts, divergent
    necessary-condition trends); they never alter the JSON schema.
    """

    verdict: str
    statistic: float
    route: str
    shells: list[tuple[float, float]]
    crosscheck: dict | None
    config_echo: dict
    notes: tuple[str, ...] = ()
    growth: float | None = None
    ladder_detail: list = field(default_factory=list, repr=False)

    def to_json(self) -> dict:
        return {
            "verdict": self.verdict,
            "statistic": self.statistic,
            "route": self.route,
            "shells": [{"r": r, "max": m} for r, m in self.shells],
            "crosscheck": self.crosscheck,
            "config_echo": self.config_echo,
        }


# -- symbol classification ----------------------------------------------------

def _is_zero(sym: Symbol) -> bool:
    return sym.is_constant() and abs(complex(np.asarray(sym(0.0 + 0.0j)).item())) == 0.0


def _is_identity(sym: Symbol) -> bool:
    t = sym.taylor(4)
    ref = np.zeros(t.coeffs.size, complex)
    ref[1] = 1.0
    return bool(np.all(np.abs(t.coeffs - ref) <= 1e-14)
                and t.tail_bound(VACUITY_MARGIN) <= 1e-12)


def _resolve_kind(kind: str, psi: Symbol, allowed: tuple) -> tuple[str, Symbol]:
    if kind in _ID_ALIAS:
        kind, psi = _ID_ALIAS[kind], Symbol.identity()
    if kind not in allowed:
        raise ArgumentError(f"kind must be one of {allowed} (or an id alias)")
    return kind, psi


def _require_self_map(psi: Symbol) -> None:
    rep = psi.self_map_check()
    if not rep.ok:
        raise PreconditionError(
            f"psi is not a disk self-map (sup modulus {rep.sup_modulus:.6f})")


# -- shell machinery ----------------------------------------------------------

def _shell_mids(w: WeightSpec, cfg: CheckConfig) -> np.ndarray:
    edges = tau_ladder(w, cfg.r_cut, cfg.shell_density)
    return 0.5 * (edges[:-1] + edges[1:])


def _shell_points(mids: np.ndarray, n_angles: int) -> np.ndarray:
    theta = 2.0 * np.pi * np.arange(n_angles) / n_angles
    return (mids[:, None] * np.exp(1j * theta)[None, :]).ravel()


def _shell_max(values: np.ndarray, n_shells: int, n_angles: int) -> np.ndarray:
    return np.max(values.reshape(n_shells, n_angles), axis=1)


def _annulus_max(grid: DiskQuadrature, values: np.ndarray) -> np.ndarray:
    out = np.empty(grid.n_annuli)
    for k, (lo, hi) in enumerate(grid.annulus_slices):
        out[k] = np.max(values[lo:hi]) if hi > lo else 0.0
    return out


def _pack_shells(radii: np.ndarray, maxima: np.ndarray) -> list[tuple[float, float]]:
    return [(float(r), float(m)) for r, m in zip(radii, maxima)]


def _exp_clip(x):
    """exp with the argument clipped so divergent statistics stay finite."""
    return np.exp(np.minimum(x, 700.0))


def _fit_log_slope(vals: np.ndarray) -> float:
    """Least-squares slope of log(vals) against shell index, last FIT_WINDOW."""
    tail = np.asarray(vals[-FIT_WINDOW:], float)
    pos = tail > 0.0
    if np.count_nonzero(pos) < 2:
        return 0.0
    idx = np.arange(tail.size, dtype=float)[pos]
    return float(np.polyfit(idx, np.log(tail[pos]), 1)[0])


def _trend_verdict(shell_max: np.ndarray) -> tuple[str, float]:
    """(bounded | unbounded | inconclusive, fitted log-slope) for a sup route."""
    v = np.asarray(shell_max, float)
    if v.size == 0 or float(np.max(v)) == 0.0:
        return "bounded", 0.0
    slope = _fit_log_slope(v)
    if v.size >= TREND_WINDOW + 1:
        tail = v[-(TREND_WINDOW + 1):]
        non_increasing = bool(np.all(np.diff(tail) <= 1e-9 * np.max(tail)))
        increasing = bool(np.all(np.diff(tail) > 0.0))
    else:
        non_increasing = increasing = False
    interior_peak = int(np.argmax(v)) < v.size - INTERIOR_MARGIN
    if non_increasing and interior_peak:
        return "bounded", slope
    if increasing and slope > SLOPE_MIN:
        return "unbounded", slope
    return "inconclusive", slope


def _limit_verdict(shell_max: np.ndarray) -> str:
    """compact | not_compact | inconclusive for a boundary-limit-zero rule."""
    v = np.asarray(shell_max, float)
    if v.size == 0 or float(np.max(v)) == 0.0:
        return "compact"
    if v.size <= LIMIT_WINDOW:
        return "inconclusive"
    tail = v[-LIMIT_WINDOW:]
    decreasing = bool(np.all(np.diff(tail) <= 1e-9 * np.max(tail)))
    interior = float(np.max(v[:-LIMIT_WINDOW]))
    if interior == 0.0:
        return "inconclusive"
    if decreasing and v[-1] < LIMIT_RATIO * interior:
        return "compact"
    trend, _ = _trend_verdict(v)
    if trend == "unbounded":
        return "not_compact"
    if trend == "bounded" and v[-1] >= LIMIT_RATIO * interior:
        return "not_compact"
    return "inconclusive"


def _growth_verdict(growth: float, good: str, bad: str) -> str:
    if growth < GROWTH_STABLE:
        return good
    if growth >= GROWTH_DIVERGENT:
        return bad
    return "inconclusive"


def _nested_stat(w: WeightSpec, log_at, s: float, cfg: CheckConfig,
                 norm_log=lambda_norm_log):
    """Integral statistic on |z| < r_cut plus its nested-domain growth.

    log_at(probe_grid) -> log integrand at the probe nodes.  One build:
    the coarse statistic masks the same values to |z| < coarse_r_cut, so
    refinement costs a second norm, not a second integrand evaluation.
    Returns (log statistic, growth or None, shell radii, shell maxima).
    """
    probe = build_probe_grid(w, cfg.r_cut, cfg.probe_density)
    log_f = np.asarray(log_at(probe))
    stat = norm_log(probe, log_f, s)
    shell = _annulus_max(probe, _exp_clip(log_f))
    if not cfg.refine:
        return stat, None, probe.annulus_mid, shell
    masked = np.where(probe.radii <= cfg.coarse_r_cut, log_f, -math.inf)
    coarse = norm_log(probe, masked, s)
    growth = 1.0 if coarse == -math.inf else float(_exp_clip(stat - coarse))
    return stat, growth, probe.annulus_mid, shell


def _area_norm_log(grid: DiskQuadrature, log_f: np.ndarray, s: float) -> float:
    """log of the plain-dA L^s norm of exp(log_f) over the grid."""
    total = s * np.asarray(log_f, float) + grid.log_weights
    m = float(np.max(total, initial=-math.inf))
    if m == -math.inf:
        return -math.inf
    return (m + math.log(float(np.sum(np.exp(total - m))))) / s


# -- spectral cross-check -----------------------------------------------------

def _run_ladder(w: WeightSpec, kind: str, psi: Symbol, g: Symbol,
                cfg: CheckConfig, p_list: tuple) -> tuple[list, dict | None, tuple]:
    """Spectral summaries over the truncation ladder; failures become notes."""
    ladder = []
    try:
        for N in cfg.ladder:
            mat = build_operator(kind, psi, g, w, N)
            ladder.append((N, spectral_summary(mat, p_list)))
    except (ResourceError, TruncationError) as exc:
        return [], None, (f"crosscheck skipped: {exc}",)
    top_n, top = ladder[-1]
    return ladder, {"N": top_n, "op_norm": top.op_norm}, ()


def _ladder_saturated(ladder: list) -> bool:
    ops = [s.op_norm for _, s in ladder]
    prev, last = ops[-2], ops[-1]
    if last == 0.0:
        return True
    return (last - prev) / max(prev, 1e-300) < SATURATION_REL


# -- boundedness --------------------------------------------------------------

def _trivial_report(verdict: str, route: str, cfg: CheckConfig) -> CriterionReport:
    return CriterionReport(verdict, 0.0, route, [], None, cfg.echo())


def _sup_route_m(w: WeightSpec, req: TransformRequest,
                 cfg: CheckConfig) -> tuple[np.ndarray, np.ndarray]:
    """Shell radii and shell maxima of the M transform (route A)."""
    grid = build_grid(w, cfg.inner_r_cut, cfg.grid_density)
    mids = _shell_mids(w, cfg)
    zs = _shell_points(mids, cfg.n_angles)
    vals = _exp_clip(m_transform(req, zs, grid))
    return mids, _shell_max(vals, mids.size, cfg.n_angles)


def _m_log_at(w: WeightSpec, req: TransformRequest, cfg: CheckConfig):
    inner = build_grid(w, cfg.inner_r_cut, cfg.integral_density)

    def log_at(probe: DiskQuadrature):
        return m_transform(req, probe.points, inner)
    return log_at


def _route_name(p: float, q: float) -> str:
    if q == math.inf:
        return "1.1C"
    if p <= q:
        return "1.1A"
    s = 1.0 if p == math.inf else p / (p - q)
    return f"1.1B(s={s:g})"


_bounded_cache: dict[tuple, CriterionReport] = {}


def _cache_key(w: WeightSpec, kind: str, psi: Symbol, g: Symbol,
               p: float, q: float, cfg: CheckConfig) -> tuple:
    return (w.spec_string(), kind, psi.to_spec(), g.to_spec(), p, q,
            repr(sorted(cfg.echo().items())))


def check_boundedness(w: WeightSpec, kind: str, psi: Symbol, g: Symbol,
                      p: float, q: float,
                      config: CheckConfig | None = None) -> CriterionReport:
    """Decide whether the operator maps the p-space into the q-space.

    Route A (p <= q, q finite) takes the sup of the M transform over
    boundary shells; route B (q < p) takes its L^s(d lambda) norm with
    s = p/(p-q) (s = 1 at p = infinity) and classifies nested-domain
    growth; route C (q = infinity) takes the sup of the pointwise N
    transform.  Route B results are memoized so the compactness check
    (identical by the theorem) does not recompute the kernel moments.
    """
    cfg = config or CheckConfig()
    kind, psi = _resolve_kind(kind, psi, CHECK_KINDS)
    req = TransformRequest(kind, p, q, psi, g)
    _require_self_map(psi)
    if _is_zero(g):
        return _trivial_report("bounded", _route_name(p, q), cfg)

    if q == math.inf:
        report = _route_c(w, req, cfg, compactness=False)
    elif p <= q:
        mids, shell = _sup_route_m(w, req, cfg)
        verdict, _ = _trend_verdict(shell)
        report = CriterionReport(verdict, float(np.max(shell)), "1.1A",
                                 _pack_shells(mids, shell), None, cfg.echo())
    else:
        key = _cache_key(w, kind, psi, g, p, q, cfg)
        cached = _bounded_cache.get(key)
        if cached is not None:
            return replace(cached)
        s = 1.0 if p == math.inf else p / (p - q)
        stat_log, growth, mids, shell = _nested_stat(
            w, _m_log_at(w, req, cfg), s, cfg)
        verdict = (_trend_verdict(shell)[0] if growth is None
                   else _growth_verdict(growth, "bounded", "unbounded"))
        report = CriterionReport(verdict, float(_exp_clip(stat_log)),
                                 f"1.1B(s={s:g})", _pack_shells(mids, shell),
                                 None, cfg.echo(), growth=growth)
        report = _attach_nc_note(w, req, report, cfg)
        if len(_bounded_cache) > 64:
            _bounded_cache.clear()
        _bounded_cache[key] = replace(report)
        return report

    report = _attach_nc_note(w, req, report, cfg)
    if cfg.crosscheck and p == 2.0 and q == 2.0:
        report = _attach_bounded_crosscheck(w, kind, psi, g, report, cfg)
    return report


def _route_c(w: WeightSpec, req: TransformRequest, cfg: CheckConfig,
             compactness: bool) -> CriterionReport:
    mids = _shell_mids(w, cfg)
    zs = _shell_points(mids, cfg.n_angles)
    vals = np.asarray(n_transform(w, req, zs))
    shell = _shell_max(vals, mids.size, cfg.n_angles)
    sup_psi = req.psi.self_map_check().sup_modulus
    vacuous = sup_psi < VACUITY_MARGIN
    route = "1.1C"
    if compactness:
        if vacuous:
            verdict, route = "compact", "1.1C-vacuous-limit"
        else:
            verdict = _limit_verdict(shell)
    else:
        verdict, _ = _trend_verdict(shell)
    return CriterionReport(verdict, float(np.max(shell, initial=0.0)), route,
                           _pack_shells(mids, shell), None, cfg.echo())


def _attach_nc_note(w: WeightSpec, req: TransformRequest,
                    report: CriterionReport, cfg: CheckConfig) -> CriterionReport:
    """Bounded verdicts carry the necessary-condition trend as a sanity note."""
    if report.verdict != "bounded" or not report.shells:
        return report
    mids = np.array([r for r, _ in report.shells])
    zs = _shell_points(mids, cfg.n_angles)
    vals = necessary_condition(w, req.op_kind, req.psi, req.g, req.p, req.q, zs)
    trend, _ = _trend_verdict(_shell_max(np.asarray(vals), mids.size, cfg.n_angles))
    if trend == "unbounded":
        report.notes = report.notes + ("necessary-condition trend divergent",)
    return report


def _attach_bounded_crosscheck(w: WeightSpec, kind: str, psi: Symbol, g: Symbol,
                               report: CriterionReport,
                               cfg: CheckConfig) -> CriterionReport:
    ladder, cc, notes = _run_ladder(w, kind, psi, g, cfg, (2.0,))
    report.crosscheck = cc
    report.notes = report.notes + notes
    report.ladder_detail = ladder
    if not ladder:
        return report
    saturated = _ladder_saturated(ladder)
    if report.verdict == "bounded" and not saturated:
        report.verdict = "inconclusive"
        report.route += "+crosscheck-conflict"
        report.notes += ("bounded verdict vs growing op-norm ladder",)
    elif report.verdict == "unbounded" and saturated:
        report.verdict = "inconclusive"
        report.route += "+crosscheck-conflict"
        report.notes += ("unbounded verdict vs saturated op-norm ladder",)
    return report


# -- compactness --------------------------------------------------------------

def check_compactness(w: WeightSpec, kind: str, psi: Symbol, g: Symbol,
                      p: float, q: float,
                      config: CheckConfig | None = None) -> CriterionReport:
    """Decide compactness; on route B this is boundedness verbatim.

    Routes A and C demand the shell maxima decay to below LIMIT_RATIO times
    the interior maximum.  When sup|psi| < 1 the route-C boundary limit is
    over an empty set; the operator is declared compact and the route name
    flags the vacuity.
    """
    cfg = config or CheckConfig()
    kind, psi = _resolve_kind(kind, psi, CHECK_KINDS)
    req = TransformRequest(kind, p, q, psi, g)
    _require_self_map(psi)
    if _is_zero(g):
        return _trivial_report("compact", _route_name(p, q), cfg)

    if q == math.inf:
        report = _route_c(w, req, cfg, compactness=True)
    elif p <= q:
        mids, shell = _sup_route_m(w, req, cfg)
        report = CriterionReport(_limit_verdict(shell), float(np.max(shell)),
                                 "1.1A", _pack_shells(mids, shell), None,
                                 cfg.echo())
    else:
        inner = check_boundedness(w, kind, psi, g, p, q, cfg)
        verdict = {"bounded": "compact", "unbounded": "not_compact"}.get(
            inner.verdict, "inconclusive")
        report = CriterionReport(verdict, inner.statistic,
                                 inner.route + "=K", inner.shells,
                                 inner.crosscheck, cfg.echo(),
                                 notes=inner.notes, growth=inner.growth)

    if cfg.crosscheck and p == 2.0 and q == 2.0 and report.crosscheck is None:
        ladder, cc, notes = _run_ladder(w, kind, psi, g, cfg, (2.0,))
        report.crosscheck = cc
        report.notes = report.notes + notes
        report.ladder_detail = ladder
    return report


# -- Schatten membership ------------------------------------------------------

def _distortion_log(w: WeightSpec, radii: np.ndarray) -> np.ndarray:
    uniq, inverse = np.unique(np.round(radii, 14), return_inverse=True)
    per = np.array([math.log(w.distortion(float(r))) for r in uniq])
    return per[inverse]


def check_schatten(w: WeightSpec, kind: str, psi: Symbol, g: Symbol, p: float,
                   config: CheckConfig | None = None) -> CriterionReport:
    """Decide membership of the operator's singular values in the p-ladder.

    General route: L^{p/2}(d lambda) norm of the q = 2 kernel moment, with
    nested-domain growth classification.  Identity case: the criteria are
    stated through the derivative of the supplied symbol (h = g'); p <= 1
    applies the rigidity theorem (h nonzero forces exclusion) and the
    statistic documents the divergence, p > 1 measures the
    distortion-weighted derivative in L^p(d lambda).
    """
    cfg = config or CheckConfig()
    kind, psi = _resolve_kind(kind, psi, SCHATTEN_KINDS)
    if not p > 0.0:
        raise ArgumentError(f"Schatten exponent must be positive, got {p}")
    _require_self_map(psi)
    if _is_zero(g):
        return _trivial_report("in_Sp", "1.2", cfg)

    if _is_identity(psi):
        report = _schatten_id(w, g, p, cfg)
    else:
        if kind == "GV":
            inner = build_grid(w, cfg.inner_r_cut, cfg.integral_density)

            def log_at(probe):
                return gv_transform(w, psi, g, probe.points, inner)
            route = "1.2-GV(q=2)"
        else:
            req = TransformRequest("C_g_psi", 2.0, 2.0, psi, g)
            log_at = _m_log_at(w, req, cfg)
            route = "1.2(M022)"
        stat_log, growth, mids, shell = _nested_stat(w, log_at, 0.5 * p, cfg)
        verdict = ("inconclusive" if growth is None
                   else _growth_verdict(growth, "in_Sp", "not_in_Sp"))
        report = CriterionReport(verdict, float(_exp_clip(stat_log)), route,
                                 _pack_shells(mids, shell), None, cfg.echo(),
                                 growth=growth)

    if cfg.crosscheck:
        ladder, cc, notes = _run_ladder(w, kind, psi, g, cfg, (p, 2.0))
        report.crosscheck = cc
        report.notes = report.notes + notes
        report.ladder_detail = ladder
    return report


def _schatten_id(w: WeightSpec, g: Symbol, p: float,
                 cfg: CheckConfig) -> CriterionReport:
    h = g.derivative_symbol()
    if _is_zero(h):
        return _trivial_report("in_Sp", "1.2-id(g'=0)", cfg)

    def log_at(probe):
        with np.errstate(divide="ignore"):
            log_h = np.log(np.abs(np.asarray(h(probe.points))))
        return log_h + _distortion_log(w, probe.radii)

    stat_log, growth, mids, shell = _nested_stat(w, log_at, p, cfg)
    if p <= 1.0:
        verdict, route = "not_in_Sp", "1.2-id-rigidity(p<=1)"
    else:
        route = "1.2-id(L^p-dlambda)"
        verdict = ("inconclusive" if growth is None
                   else _growth_verdict(growth, "in_Sp", "not_in_Sp"))
    return CriterionReport(verdict, float(_exp_clip(stat_log)), route,
                           _pack_shells(mids, shell), None, cfg.echo(),
                           growth=growth)


# -- pointwise necessary condition -------------------------------------------

def necessary_condition(w: WeightSpec, kind: str, psi: Symbol, g: Symbol,
                        p: float, q: float, z):
    """Pointwise lower-bound statistic that any bounded operator keeps finite.

    |g(psi z)| |psi'(z)| tau(z)^{2/q} tau(psi z)^{-2/p}
    (1+phi'(psi z)) (1+phi'(z))^{-1} (omega(z)/omega(psi z))^{1/2},
    without the (1+phi'(psi z)) factor for the plain composition kind.
    Evaluated in the log domain; linear-scale result.
    """
    kind, psi = _resolve_kind(kind, psi, CHECK_KINDS)
    z_arr = np.atleast_1d(np.asarray(z, complex))
    pz = np.asarray(psi(z_arr))
    r, rq = np.abs(z_arr), np.abs(pz)
    two_q = 0.0 if q == math.inf else 2.0 / q
    two_p = 0.0 if p == math.inf else 2.0 / p
    with np.errstate(divide="ignore"):
        log_val = (np.log(np.abs(np.asarray(g(pz))))
                   + np.log(np.abs(np.asarray(psi.derivative(z_arr))))
                   + two_q * np.log(np.asarray(w.tau(r), float))
                   - two_p * np.log(np.asarray(w.tau(rq), float))
                   - np.asarray(w.log1p_phi_prime(r), float)
                   + 0.5 * (np.asarray(w.log_omega(r), float)
                            - np.asarray(w.log_omega(rq), float)))
    if kind == "C_psi_g":
        log_val = log_val + np.asarray(w.log1p_phi_prime(rq), float)
    out = np.exp(log_val).reshape(z_arr.shape)
    return out if np.ndim(z) else float(out[0])


# -- identity-case panel ------------------------------------------------------

def id_case_panel(w: WeightSpec, g: Symbol, p: float, q: float,
                  config: CheckConfig | None = None) -> dict:
    """All four simplified identity-case statistics for h = g'.

    sup_deriv:     |h| (1+phi')^{-1} laplacian^{1/p - 1/q} in L^infinity
    area_integral: |h| / (1+phi') in L^{pq/(p-q)}(dA), p > q only
    sup_distort:   psi_omega |h| in L^infinity
    schatten:      psi_omega |h| in L^p(d lambda)

    The clause matching the given (p, q) is compared against the general
    M-transform route run on h; the bundle reports whether they agree.
    """
    cfg = config or CheckConfig()
    h = g.derivative_symbol()
    mids = _shell_mids(w, cfg)
    zs = _shell_points(mids, cfg.n_angles)
    r = np.abs(zs)
    habs = np.abs(np.asarray(h(zs)))
    zero_h = _is_zero(h)
    l1p = np.asarray(w.log1p_phi_prime(r), float)
    panel: dict = {}

    inv_pq = (0.0 if p == math.inf else 1.0 / p) - (0.0 if q == math.inf else 1.0 / q)
    with np.errstate(divide="ignore"):
        sup_vals = habs * np.exp(-l1p + inv_pq * np.log(np.asarray(w.laplacian(r), float)))
    shell = _shell_max(sup_vals, mids.size, cfg.n_angles)
    verdict = "bounded" if zero_h else _trend_verdict(shell)[0]
    panel["sup_deriv"] = CriterionReport(
        verdict, float(np.max(shell, initial=0.0)), "id-V7",
        _pack_shells(mids, shell), None, cfg.echo())

    if q < p:
        s_exp = q if p == math.inf else p * q / (p - q)

        def log_area(pr):
            with np.errstate(divide="ignore"):
                return (np.log(np.abs(np.asarray(h(pr.points))))
                        - np.asarray(w.log1p_phi_prime(pr.radii), float))
        stat_log, growth, amids, ashell = _nested_stat(w, log_area, s_exp, cfg,
                                                       norm_log=_area_norm_log)
        if zero_h:
            verdict = "bounded"
        else:
            verdict = ("inconclusive" if growth is None
                       else _growth_verdict(growth, "bounded", "unbounded"))
        panel["area_integral"] = CriterionReport(
            verdict, float(_exp_clip(stat_log)), f"id-CAC1(s={s_exp:g})",
            _pack_shells(amids, ashell), None, cfg.echo(), growth=growth)
    else:
        panel["area_integral"] = None

    dist_vals = habs * np.exp(_distortion_log(w, r))
    shell_d = _shell_max(dist_vals, mids.size, cfg.n_angles)
    verdict = "bounded" if zero_h else _trend_verdict(shell_d)[0]
    panel["sup_distort"] = CriterionReport(
        verdict, float(np.max(shell_d, initial=0.0)), "id-JorPelC",
        _pack_shells(mids, shell_d), None, cfg.echo())

    panel["schatten"] = check_schatten(w, "C_g_psi", Symbol.identity(), g, p, cfg)

    m_route = check_boundedness(w, "C_g_psi", Symbol.identity(), h, p, q, cfg)
    key = "sup_distort" if p == q else ("sup_deriv" if p < q else "area_integral")
    panel["m_route"] = m_route
    panel["matched_clause"] = key
    panel["agree"] = bool(panel[key] is not None
                          and panel[key].verdict == m_route.verdict)
    return panel
