"""Acceptance gate: ten end-to-end properties at production resolution.

Each test prints one PASS/FAIL line with the measured statistic and wall
time next to its pinned bound, then asserts both.  Run with ``-s`` to see
the lines for passing tests; on failure pytest replays the captured line.
All runs are deterministic (fixed seeds, fixed configs).
"""

import math
import time

import numpy as np

from bergmanops.criteria import (TREND_WINDOW, CheckConfig, check_boundedness,
                                 check_compactness, check_schatten)
from bergmanops.kernel import (get_table, kernel_eval, kernel_norm_band,
                               required_degree)
from bergmanops.lattice import (build_lattice, coverage_fraction,
                                multiplicity_report, separation_report)
from bergmanops.operators import toeplitz_identity_check
from bergmanops.quadrature import build_grid, pullback_measure
from bergmanops.symbols import Symbol, parse_symbol
from bergmanops.transforms import ap_norm, averaging, berezin, lp_norm


def _line(num: int, ok: bool, text: str) -> None:
    print(f"[{'PASS' if ok else 'FAIL'}] criterion {num:2d}: {text}")


def test_01_kernel_norm_law(w11):
    """||K_z||^2 omega tau^2 stays within a factor-20 band out to 0.99."""
    t0 = time.time()
    band = kernel_norm_band(w11, 2.0, np.linspace(0.0, 0.99, 200))
    quantity = band.values ** 2
    dr = float(np.max(quantity) / np.min(quantity))
    dt = time.time() - t0
    ok = dr <= 20.0 and dt <= 60.0
    _line(1, ok, f"kernel law band DR {dr:.2f} <= 20, {dt:.1f}s <= 60s")
    assert dr <= 20.0
    assert dt <= 60.0


def test_02_lattice_covering(w11):
    t0 = time.time()
    delta = 0.1 * w11.m_tau()
    lat = build_lattice(w11, delta, 0.95)
    sep = separation_report(lat)
    rng = np.random.default_rng(7)
    n = 100_000
    probes = 0.95 * np.sqrt(rng.random(n)) * np.exp(2j * np.pi * rng.random(n))
    cov = coverage_fraction(lat, probes)
    mult = multiplicity_report(lat, probes[:2000], factor=3.0)
    dt = time.time() - t0
    ok = sep["separated"] and cov == 1.0 and mult["max"] <= 256 and dt <= 30.0
    _line(2, ok, f"lattice {lat.n_centers} centers, separated "
          f"{sep['separated']}, coverage {cov:.4f} = 1, 3-delta multiplicity "
          f"{mult['max']} <= 256, {dt:.1f}s <= 30s")
    assert sep["separated"]
    assert cov == 1.0
    assert mult["max"] <= 256
    assert dt <= 30.0


def test_03_littlewood_paley_band(w11):
    """Derivative functional vs p-th power of the norm, nine cases."""
    t0 = time.time()
    grid = build_grid(w11, 0.99, 1.0)
    deg = required_degree(w11, 0.5 * 0.99)
    tab = get_table(w11, deg)
    coeffs = np.exp(-tab.log_c[:deg + 1]) * 0.5 ** np.arange(deg + 1)
    k_half = Symbol.polynomial(
        coeffs / math.sqrt(float(kernel_eval(w11, 0.5, 0.5).real)))
    ratios = [
        lp_norm(w11, f, p, grid) / ap_norm(w11, f, p, grid) ** p
        for f in (Symbol.identity(), Symbol.polynomial([0, 0, 0, 1.0]), k_half)
        for p in (1.0, 2.0, 4.0)
    ]
    dr = max(ratios) / min(ratios)
    dt = time.time() - t0
    ok = dr <= 50.0 and dt <= 60.0
    _line(3, ok, f"LP ratio band DR {dr:.2f} <= 50 over 9 cases, "
          f"{dt:.1f}s <= 60s")
    assert dr <= 50.0
    assert dt <= 60.0


def test_04_toeplitz_identity(w11):
    t0 = time.time()
    cases = [
        (Symbol.scaled_moebius(0.5, 0.0), Symbol.identity()),
        (Symbol.identity(), Symbol.constant(1.0)),
        (parse_symbol("moebius:0.3"), Symbol.polynomial([0, 0, 1.0])),
    ]
    errs = [toeplitz_identity_check(psi, g, w11, 30)["frobenius_rel_err"]
            for psi, g in cases]
    dt = time.time() - t0
    ok = max(errs) < 1e-8 and dt <= 120.0
    _line(4, ok, f"Toeplitz identity worst rel err {max(errs):.2e} < 1e-8 "
          f"over 3 symbol pairs at N=30, {dt:.1f}s <= 120s")
    assert max(errs) < 1e-8
    assert dt <= 120.0


def test_05_identity_p_less_q_rigidity(w11):
    """(2,4) derivative composition: g = z diverges, g = 0 is flat zero."""
    t0 = time.time()
    rep = check_boundedness(w11, "I", Symbol.identity(), Symbol.identity(),
                            2.0, 4.0)
    maxima = np.array([m for _, m in rep.shells])
    tail_up = bool(np.all(np.diff(maxima[-(TREND_WINDOW + 1):]) > 0.0))
    zero = check_boundedness(w11, "I", Symbol.identity(),
                             Symbol.constant(0.0), 2.0, 4.0)
    dt = time.time() - t0
    ok = (rep.verdict == "unbounded" and tail_up
          and zero.verdict == "bounded" and zero.statistic == 0.0
          and dt <= 60.0)
    _line(5, ok, f"(2,4) id: g=z {rep.verdict} with increasing tail "
          f"{tail_up}, g=0 {zero.verdict} stat {zero.statistic}, "
          f"{dt:.1f}s <= 60s")
    assert rep.verdict == "unbounded"
    assert tail_up
    assert zero.verdict == "bounded"
    assert zero.statistic == 0.0
    assert dt <= 60.0


def test_06_bounded_iff_compact_above_diagonal(w11):
    """p > q: boundedness and compactness verdicts must always pair up."""
    t0 = time.time()
    rng = np.random.default_rng(20260823)
    pairing = {"bounded": "compact", "unbounded": "not_compact",
               "inconclusive": "inconclusive"}
    mismatches = 0
    verdicts = []
    for _ in range(20):
        c = rng.standard_normal(4) + 1j * rng.standard_normal(4)
        psi = Symbol.polynomial(0.85 * c / np.sum(np.abs(c)))
        g = Symbol.polynomial(rng.standard_normal(1 + rng.integers(1, 4)))
        rb = check_boundedness(w11, "C_g_psi", psi, g, 4.0, 2.0)
        rk = check_compactness(w11, "C_g_psi", psi, g, 4.0, 2.0)
        verdicts.append(rb.verdict)
        if rk.verdict != pairing[rb.verdict] or rk.statistic != rb.statistic:
            mismatches += 1
    dt = time.time() - t0
    ok = mismatches == 0 and dt <= 600.0
    _line(6, ok, f"20 random (psi, g) at (4,2): {mismatches} verdict "
          f"mismatches ({verdicts.count('bounded')} bounded, "
          f"{verdicts.count('unbounded')} unbounded, "
          f"{verdicts.count('inconclusive')} inconclusive), "
          f"{dt:.0f}s <= 600s")
    assert mismatches == 0
    assert dt <= 600.0


def test_07_schatten_small_p_rigidity(w11):
    t0 = time.time()
    rep = check_schatten(w11, "J", Symbol.identity(), Symbol.identity(), 0.5)
    const = check_schatten(w11, "J", Symbol.identity(),
                           Symbol.constant(3.0), 0.5)
    dt = time.time() - t0
    ok = (rep.verdict == "not_in_Sp" and rep.growth >= 2.0
          and const.verdict == "in_Sp" and const.statistic == 0.0
          and dt <= 120.0)
    _line(7, ok, f"p=0.5 id: g=z {rep.verdict} with x{rep.growth:.1f} "
          f"growth under domain refinement (>= 2), g const {const.verdict} "
          f"stat {const.statistic}, {dt:.1f}s <= 120s")
    assert rep.verdict == "not_in_Sp"
    assert rep.growth >= 2.0
    assert const.verdict == "in_Sp"
    assert const.statistic == 0.0
    assert dt <= 120.0


def test_08_spectral_cross_validation(w11):
    t0 = time.time()
    half, one = Symbol.scaled_moebius(0.5, 0.0), Symbol.constant(1.0)
    cfg = CheckConfig(crosscheck=True)
    rb = check_boundedness(w11, "C_g_psi", half, one, 2.0, 2.0, cfg)
    rk = check_compactness(w11, "C_g_psi", half, one, 2.0, 2.0, cfg)
    rungs = [(N, s.op_norm, s.schatten[2.0] ** 2) for N, s in rb.ladder_detail]
    op_rel = abs(rungs[-1][1] - rungs[-2][1]) / rungs[-2][1]
    s2_rel = abs(rungs[-1][2] - rungs[-2][2]) / rungs[-2][2]
    rs = check_schatten(w11, "C_g_psi", half, one, 2.0)
    dt = time.time() - t0
    ok = (rb.verdict == "bounded" and rk.verdict == "compact"
          and [N for N, _, _ in rungs] == [16, 32, 64, 128]
          and op_rel <= 0.05 and s2_rel <= 0.02
          and math.isfinite(rs.statistic) and dt <= 300.0)
    _line(8, ok, f"z/2 ladder: {rb.verdict}+{rk.verdict}, op_norm "
          f"saturation {op_rel:.2e} <= 5e-2, sum s^2 saturation "
          f"{s2_rel:.2e} <= 2e-2, S_2 stat {rs.statistic:.3f} finite, "
          f"{dt:.1f}s <= 300s")
    assert rb.verdict == "bounded"
    assert rk.verdict == "compact"
    assert [N for N, _, _ in rungs] == [16, 32, 64, 128]
    assert op_rel <= 0.05
    assert s2_rel <= 0.02
    assert math.isfinite(rs.statistic)
    assert dt <= 300.0


def test_09_carleson_equivalence_band(w11):
    """Berezin transform vs averaged measure on lattice centers."""
    t0 = time.time()
    grid = build_grid(w11, 0.95, 2.0)
    mu = pullback_measure(w11, Symbol.identity(), Symbol.constant(1.0),
                          2.0, grid)
    delta = 0.9 * w11.m_tau()
    lat = build_lattice(w11, delta, 0.95)
    centers = lat.centers[np.abs(lat.centers) <= 0.9][:100]
    s = 2.0
    factor = np.asarray(w11.tau(np.abs(centers))) ** (2.0 * (1.0 - 1.0 / s))
    smoothed = factor * np.exp(np.asarray(berezin(w11, mu, 2.0, centers)))
    averaged = factor * np.asarray(averaging(w11, mu, delta, centers))
    dt = time.time() - t0
    ratio = smoothed / averaged
    dr = float(np.max(ratio) / np.min(ratio))
    ok = (centers.size == 100 and np.all(averaged > 0.0)
          and dr <= 100.0 and dt <= 120.0)
    _line(9, ok, f"Berezin/averaging ratio DR {dr:.1f} <= 100 over "
          f"{centers.size} centers, {dt:.1f}s <= 120s")
    assert centers.size == 100
    assert np.all(averaged > 0.0)
    assert dr <= 100.0
    assert dt <= 120.0


def test_10_distortion_law():
    t0 = time.time()
    from bergmanops.weights import WeightSpec
    radii = np.linspace(0.0, 0.99, 200)[1:]
    ratios = {}
    for b, a in ((1.0, 1.0), (2.0, 1.0), (0.5, 1.5)):
        band = WeightSpec.exponential(b, a).distortion_band(radii)
        ratios[(b, a)] = band.ratio
    dt = time.time() - t0
    worst = max(ratios.values())
    ok = worst <= 10.0 and dt <= 30.0
    _line(10, ok, "distortion product DR "
          + ", ".join(f"{k}: {v:.2f}" for k, v in ratios.items())
          + f" all <= 10, {dt:.1f}s <= 30s")
    assert worst <= 10.0
    assert dt <= 30.0
