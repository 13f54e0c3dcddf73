"""Weight family: prototype identities, class constants, distortion.

Frozen reference values come from 40-digit mpmath evaluation of the
defining formulas and integrals (see scripts/regen_oracles.py); they are
independent of every code path under test.
"""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bergmanops.errors import ArgumentError, DomainError, RangeError
from bergmanops.weights import WeightSpec

# (b, alpha) = (1, 1); suprema refined by root-finding on the derivative
C1_ORACLE = 0.84415408638415407      # sup tau(r) / (1 - r)
C2_ORACLE = 1.0106598168848096       # sup |tau'(r)|
M_TAU_ORACLE = 0.24736315407352724   # min(1, 1/c1, 1/c2) / 4

# psi_omega(r) = omega(r)^-1 int_r^1 omega, mpmath adaptive quadrature
DISTORTION_ORACLE = {
    0.3: 0.34520545570228724,
    0.5: 0.20712179865227922,
    0.8: 0.048493572841042227,
}


def test_prototype_closed_forms(w11):
    r = np.array([0.0, 0.2, 0.5, 0.9, 0.99])
    assert np.allclose(w11.phi(r), 0.5 / (1.0 - r * r), rtol=1e-14)
    assert np.allclose(w11.phi_prime(r), r / (1.0 - r * r) ** 2, rtol=1e-14)
    lap = 2.0 * (1.0 + r * r) / (1.0 - r * r) ** 3
    assert np.allclose(w11.laplacian(r), lap, rtol=1e-14)
    assert np.allclose(w11.tau(r), lap ** -0.5, rtol=1e-14)
    assert np.allclose(w11.log_omega(r), -1.0 / (1.0 - r * r), rtol=1e-14)


@settings(max_examples=40, deadline=None)
@given(b=st.floats(0.5, 2.0), alpha=st.floats(0.5, 2.0),
       r=st.floats(0.01, 0.95))
def test_derivatives_match_finite_differences(b, alpha, r):
    w = WeightSpec.exponential(b, alpha)
    h = 1e-6 * (1.0 - r)
    num_p = (float(w.phi(r + h)) - float(w.phi(r - h))) / (2.0 * h)
    assert num_p == pytest.approx(float(w.phi_prime(r)), rel=1e-6)
    h2 = 1e-4 * (1.0 - r)  # larger step: roundoff dominates the 2nd difference
    num_pp = (float(w.phi(r + h2)) - 2.0 * float(w.phi(r))
              + float(w.phi(r - h2))) / h2 ** 2
    assert num_pp == pytest.approx(float(w.phi_second(r)), rel=1e-5)
    num_tp = (float(w.tau(r + h)) - float(w.tau(r - h))) / (2.0 * h)
    assert num_tp == pytest.approx(float(w.tau_prime(r)), rel=1e-5, abs=1e-12)


def test_laplacian_is_radial_laplacian_of_phi(w11):
    # lap = phi'' + phi'/r for the radial prototype
    for r in (0.2, 0.5, 0.8):
        direct = float(w11.phi_second(r)) + float(w11.phi_prime(r)) / r
        assert direct == pytest.approx(float(w11.laplacian(r)), rel=1e-12)


def test_class_constants_frozen(w11):
    c1, c2 = w11.class_constants()
    assert c1 == pytest.approx(C1_ORACLE, rel=1e-6)
    assert c2 == pytest.approx(C2_ORACLE, rel=1e-6)
    assert w11.m_tau() == pytest.approx(M_TAU_ORACLE, rel=1e-6)


def test_m_tau_definition(w11):
    c1, c2 = w11.class_constants()
    assert w11.m_tau() == min(1.0, 1.0 / c1, 1.0 / c2) / 4.0


def test_r_max_guard_is_the_level_radius(w11):
    r = w11.r_max_guard
    assert 2.0 * float(w11.phi(r)) == pytest.approx(600.0, rel=1e-10)
    assert r == pytest.approx(0.9991663191547908, abs=1e-12)


def test_phi_level_radius_inverts_phi(w11):
    for level in (10.0, 100.0, 300.0):
        r = w11.phi_level_radius(level)
        assert float(w11.phi(r)) == pytest.approx(level, rel=1e-9)


def test_validate_accepts_the_prototype(w11):
    rep = w11.validate()
    assert rep.laplacian_positive
    assert rep.tau_decreasing_tail
    assert rep.class_w_tail_confirmed
    assert rep.warnings == ()


def test_distortion_frozen(w11):
    for r, val in DISTORTION_ORACLE.items():
        assert w11.distortion(r) == pytest.approx(val, rel=1e-8)


def test_distortion_product_band_is_flat(w11):
    radii = np.linspace(0.0, 0.99, 25)
    band = w11.distortion_band(radii)
    assert band.ratio < 10.0


def test_jcn_band_finite(w11):
    band = w11.jcn_check(1.0, np.linspace(0.1, 0.95, 12))
    assert np.all(np.isfinite(band.values))
    assert band.low > 0.0


def test_custom_table_matches_exponential(w11):
    r = np.linspace(0.0, 0.97, 1200)
    wt = WeightSpec.from_table(r, np.asarray(w11.phi(r)))
    for rr in (0.2, 0.5, 0.9):
        assert float(wt.phi(rr)) == pytest.approx(float(w11.phi(rr)), rel=1e-7)
        assert float(wt.phi_prime(rr)) == pytest.approx(
            float(w11.phi_prime(rr)), rel=1e-5)
        assert float(wt.tau(rr)) == pytest.approx(float(w11.tau(rr)), rel=1e-3)
    with pytest.raises(RangeError):
        wt.phi(np.array([0.999]))


def test_parse_round_trip(w11):
    assert WeightSpec.parse(w11.spec_string()) == w11
    assert WeightSpec.parse("exp:b=2,alpha=0.5") == WeightSpec.exponential(2.0, 0.5)


def test_constructor_rejects_bad_input():
    with pytest.raises(ArgumentError):
        WeightSpec.exponential(-1.0, 1.0)
    with pytest.raises(ArgumentError):
        WeightSpec.exponential(1.0, 0.0)
    with pytest.raises(ArgumentError):
        WeightSpec.parse("gauss:b=1")
    with pytest.raises(ArgumentError):
        WeightSpec("custom", table=(np.array([0.1, 0.2, 0.3, 0.4]),
                                    np.zeros(4)))


def test_distortion_domain_errors(w11):
    with pytest.raises(DomainError):
        w11.distortion(1.0)
    with pytest.raises(DomainError):
        w11.distortion(-0.1)


@settings(max_examples=20, deadline=None)
@given(b=st.floats(0.5, 2.0), alpha=st.floats(0.5, 2.0))
def test_constants_positive_and_m_tau_capped(b, alpha):
    w = WeightSpec.exponential(b, alpha)
    c1, c2 = w.class_constants()
    assert c1 > 0.0 and c2 > 0.0
    assert 0.0 < w.m_tau() <= 0.25


def test_eval_bundles_pointwise_values(w11):
    v = w11.eval(0.5)
    assert v.phi == pytest.approx(float(w11.phi(0.5)))
    assert v.tau == pytest.approx(float(w11.tau(0.5)))
    assert math.exp(v.log_omega) == pytest.approx(
        math.exp(float(w11.log_omega(0.5))))
