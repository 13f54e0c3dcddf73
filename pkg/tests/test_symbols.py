"""Symbol algebra: evaluation, Taylor truncation, derivatives, parsing."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bergmanops.errors import ArgumentError, PreconditionError
from bergmanops.symbols import Symbol, parse_symbol

small_coeffs = st.lists(
    st.complex_numbers(max_magnitude=2.0, allow_nan=False, allow_infinity=False),
    min_size=1, max_size=6)


@settings(max_examples=60, deadline=None)
@given(coeffs=small_coeffs, x=st.floats(-0.9, 0.9), y=st.floats(-0.9, 0.9))
def test_polynomial_matches_horner(coeffs, x, y):
    z = complex(x, y)
    s = Symbol.polynomial(coeffs)
    direct = sum(c * z ** n for n, c in enumerate(coeffs))
    assert s(z) == pytest.approx(direct, rel=1e-12, abs=1e-12)


def test_moebius_formula_and_self_map():
    a = 0.3 + 0.2j
    s = Symbol.moebius(a)
    z = 0.5 - 0.1j
    assert s(z) == pytest.approx((z - a) / (1 - np.conj(a) * z), rel=1e-15)
    rep = s.self_map_check()
    assert rep.ok and rep.method == "exact"
    assert s(a) == pytest.approx(0.0, abs=1e-15)


def test_moebius_rejects_boundary_parameter():
    with pytest.raises(ArgumentError):
        Symbol.moebius(1.0)


def test_scaled_moebius_dilation():
    s = Symbol.scaled_moebius(0.5, 0.0)
    assert s(0.8 + 0.2j) == pytest.approx(0.4 + 0.1j, rel=1e-15)
    assert s.self_map_check().sup_modulus == pytest.approx(0.5)


def test_composition_evaluates_inside_out():
    inner = Symbol.scaled_moebius(0.5, 0.0)
    outer = Symbol.polynomial([1.0, 0.0, 2.0])
    s = Symbol.compose(outer, inner)
    z = 0.6 + 0.3j
    assert s(z) == pytest.approx(outer(inner(z)), rel=1e-14)


@settings(max_examples=40, deadline=None)
@given(coeffs=small_coeffs, r=st.floats(0.1, 0.85))
def test_taylor_tail_bound_dominates_truncation_error(coeffs, r):
    s = Symbol.compose(Symbol.polynomial(coeffs),
                       Symbol.scaled_moebius(0.7, 0.0))
    t = s.taylor(12)
    theta = np.linspace(0.0, 2.0 * np.pi, 16, endpoint=False)
    z = r * np.exp(1j * theta)
    approx = np.polynomial.polynomial.polyval(z, t.coeffs)
    err = float(np.max(np.abs(np.asarray(s(z)) - approx)))
    assert err <= t.tail_bound(r) * (1.0 + 1e-9) + 1e-13


def test_truncate_to_meets_tolerance():
    s = Symbol.moebius(0.4)
    coeffs = s.truncate_to(0.9, tol=1e-12)
    z = 0.9 * np.exp(1j * np.linspace(0, 2 * np.pi, 32, endpoint=False))
    approx = np.polynomial.polynomial.polyval(z, coeffs)
    assert float(np.max(np.abs(np.asarray(s(z)) - approx))) < 1e-11


def test_derivative_closed_forms():
    a, c = 0.3 + 0.1j, 0.8
    s = Symbol.scaled_moebius(c, a)
    z = 0.4 - 0.2j
    expect = c * (1.0 - abs(a) ** 2) / (1.0 - np.conj(a) * z) ** 2
    assert s.derivative(z) == pytest.approx(expect, rel=1e-14)
    p = Symbol.polynomial([1.0, -2.0, 0.0, 4.0])
    assert p.derivative(z) == pytest.approx(-2.0 + 12.0 * z ** 2, rel=1e-14)


def test_derivative_symbol_polynomial_is_exact_shift():
    p = Symbol.polynomial([5.0, 1.0, 2.0, 3.0])
    d = p.derivative_symbol()
    assert d.kind == "polynomial"
    assert np.allclose(d.coeffs, [1.0, 4.0, 9.0])
    assert Symbol.constant(2.0).derivative_symbol().coeffs.tolist() == [0.0]


def test_derivative_symbol_moebius_matches_closed_form():
    s = Symbol.moebius(0.35)
    d = s.derivative_symbol()
    z = np.array([0.0, 0.3 + 0.4j, -0.6j])
    assert np.allclose(np.asarray(d(z)), np.asarray(s.derivative(z)),
                       rtol=0, atol=1e-10)


def test_derivative_symbol_chain_rule_numerically():
    s = Symbol.compose(Symbol.polynomial([0.0, 1.0, 0.5]),
                       Symbol.scaled_moebius(0.6, 0.2))
    d = s.derivative_symbol()
    for z in (0.1 + 0.2j, -0.4, 0.5j):
        h = 1e-6
        num = (s(z + h) - s(z - h)) / (2 * h)
        assert d(z) == pytest.approx(num, rel=1e-6)


def test_self_map_check_grid_method():
    s = Symbol.polynomial([0.1, 0.7])
    rep = s.self_map_check()
    assert rep.ok and rep.method == "grid"
    assert rep.sup_modulus == pytest.approx(0.8, rel=1e-3)
    bad = Symbol.polynomial([0.0, 2.0])
    assert not bad.self_map_check().ok


def test_is_constant():
    assert Symbol.constant(3.0 + 1j).is_constant()
    assert not Symbol.identity().is_constant()
    assert not Symbol.moebius(0.2).is_constant()


def test_sup_on_radius():
    s = Symbol.polynomial([0.0, 1.0, 1.0])
    assert s.sup_on_radius(0.5) == pytest.approx(0.75, rel=1e-6)


base_symbols = st.one_of(
    small_coeffs.map(Symbol.polynomial),
    st.complex_numbers(max_magnitude=0.8, allow_nan=False,
                       allow_infinity=False).map(Symbol.moebius),
    st.tuples(st.floats(0.1, 0.9), st.floats(-0.5, 0.5)).map(
        lambda t: Symbol.scaled_moebius(t[0], t[1])),
)
symbol_strategy = st.one_of(
    base_symbols,
    st.tuples(base_symbols, base_symbols).map(lambda t: Symbol.compose(*t)),
)


@settings(max_examples=50, deadline=None)
@given(s=symbol_strategy)
def test_spec_round_trip(s):
    back = parse_symbol(s.to_spec())
    t1, t2 = s.taylor(8), back.taylor(8)
    assert np.allclose(t1.coeffs, t2.coeffs, rtol=0, atol=1e-12)


def test_parse_compose_nesting():
    s = parse_symbol("compose((poly:0,1,1),(moebius:0.3))")
    m = Symbol.moebius(0.3)
    z = 0.2 + 0.1j
    assert s(z) == pytest.approx(m(z) + m(z) ** 2, rel=1e-13)
    # bare operands stay legal when they carry no top level comma
    t = parse_symbol("compose(scale:0.5,moebius:0.3)")
    assert t(z) == pytest.approx(0.5 * m(z), rel=1e-13)
    # emitted spec of a nested composition parses back to the same map
    u = Symbol.compose(s, Symbol.scaled_moebius(0.4, 0.1))
    assert parse_symbol(u.to_spec()) == u


def test_parse_errors_are_positioned():
    for bad in ("poly:", "moebius:2x", "smoebius:0.5", "compose(poly:1)",
                "what:1"):
        with pytest.raises(ArgumentError):
            parse_symbol(bad)


def test_symbols_hash_by_spec():
    assert Symbol.identity() == Symbol.polynomial([0.0, 1.0])
    assert len({Symbol.identity(), Symbol.polynomial([0.0, 1.0])}) == 1
