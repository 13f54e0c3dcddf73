"""Kernel-moment transforms, measure moments, and symbol-space norms.

The frozen transform values are mpmath oracles for psi(z) = z/2, g(z) = z,
p = q = 2 at z = 0.4: the angular integral collapses by Parseval to the
radial series sum_n (|z| s / 2)^(2n) / c_n^2, which mpmath integrates
directly (dps 30).  The identities below (Parseval normalization, measure
route, GV = 16 M0 for this g) hold exactly and pin the plumbing.
"""

import math

import numpy as np
import pytest

from bergmanops.errors import ArgumentError
from bergmanops.quadrature import (DiscreteMeasure, build_grid,
                                   pullback_measure)
from bergmanops.symbols import Symbol
from bergmanops.transforms import (TransformRequest, ap_norm, averaging,
                                   berezin, embedding_constant,
                                   embedding_function, gv_transform,
                                   kernel_moment_log, lp_norm, m_transform,
                                   measure_moment, n_transform, sp_norm)

LOG_M0 = -6.3410776200324042      # C_g_psi moment at z = 0.4
LOG_M1 = -5.8296454231053898      # C_psi_g moment, extra (1+phi'(psi))^2
LOG_GV = -3.568488897792623       # g on the original variable, = M0 + log 16
LOG_G2_ATOM = 0.22233156079820478  # Berezin of a unit atom at 0, at z = 0.4
D2_1 = 0.049990065181267713
D2_3 = 0.016040627868353047
AP_Z_P = {1.0: 0.17237781103974967, 2.0: 0.038803539578161911,
          4.0: 0.0022903434385189682}


@pytest.fixture(scope="module")
def half():
    return Symbol.scaled_moebius(0.5, 0.0)


@pytest.fixture(scope="module")
def req_half_z(half):
    return TransformRequest("C_g_psi", 2.0, 2.0, half, Symbol.identity())


# -- request validation ------------------------------------------------------

def test_request_fields_and_derived_exponents(half):
    req = TransformRequest("C_psi_g", 4.0, 2.0, half, Symbol.identity())
    assert req.n == 1 and req.t == 0.25
    req_inf = TransformRequest("C_g_psi", math.inf, 2.0, half,
                               Symbol.identity())
    assert req_inf.n == 0 and req_inf.t == 0.0
    with pytest.raises(ArgumentError):
        TransformRequest("volterra", 2.0, 2.0, half, Symbol.identity())
    with pytest.raises(ArgumentError):
        TransformRequest("C_psi_g", -1.0, 2.0, half, Symbol.identity())


# -- kernel moments ----------------------------------------------------------

def test_m_transform_matches_radial_oracle(req_half_z, half, grid99):
    got = m_transform(req_half_z, 0.4 + 0j, grid99)
    assert got == pytest.approx(LOG_M0, abs=1e-12)
    req1 = TransformRequest("C_psi_g", 2.0, 2.0, half, Symbol.identity())
    assert m_transform(req1, 0.4 + 0j, grid99) == \
        pytest.approx(LOG_M1, abs=1e-12)


def test_m_transform_normalization_identity(grid99):
    # C_psi_g with psi = id, g = 1 integrates |k_{2,z}|^2 omega, which the
    # kernel normalization makes identically one
    req = TransformRequest("C_psi_g", 2.0, 2.0, Symbol.identity(),
                           Symbol.constant(1.0))
    vals = m_transform(req, np.array([0.1 + 0j, 0.4 + 0.2j, 0.7j]), grid99)
    assert np.max(np.abs(vals)) < 1e-13


def test_m_transform_rotation_invariance(req_half_z, grid95):
    z = 0.45 * np.exp(1j * np.array([0.0, 0.7, np.pi, 4.1]))
    vals = m_transform(req_half_z, z, grid95)
    assert np.max(vals) - np.min(vals) < 1e-11


def test_m_transform_rejects_infinite_q(half):
    req = TransformRequest("C_g_psi", 2.0, math.inf, half, Symbol.identity())
    with pytest.raises(ArgumentError):
        m_transform(req, 0.3 + 0j, None)


def test_m_transform_vanishing_symbol_gives_minus_inf(grid95):
    req = TransformRequest("C_g_psi", 2.0, 2.0, Symbol.identity(),
                           Symbol.constant(0.0))
    assert m_transform(req, 0.3 + 0j, grid95) == -math.inf


def test_measure_route_agrees_with_grid_route(w11, half, req_half_z):
    grid = build_grid(w11, 0.8, 0.5)
    mu = pullback_measure(w11, half, Symbol.identity(), 2.0, grid)
    z = np.array([0.2 + 0j, 0.4 + 0.1j])
    assert np.allclose(m_transform(req_half_z, z, grid),
                       measure_moment(w11, mu, 2.0, 2.0, z),
                       rtol=0, atol=1e-12)


def test_gv_transform_value_and_ratio(w11, half, grid99):
    gv = gv_transform(w11, half, Symbol.identity(), 0.4 + 0j, grid99)
    assert gv == pytest.approx(LOG_GV, abs=1e-12)
    # |g(xi)|^2 = |2 psi(xi)|^2 ties GV to the C_g_psi moment exactly
    m0 = m_transform(TransformRequest("C_g_psi", 2.0, 2.0, half,
                                      Symbol.identity()), 0.4 + 0j, grid99)
    assert gv - m0 == pytest.approx(math.log(16.0), abs=1e-13)


def test_kernel_moment_log_empty_density(w11, grid95):
    dens = np.full(grid95.n_nodes, -math.inf)
    assert kernel_moment_log(w11, 0.3 + 0j, grid95.points, 2.0, 2.0,
                             dens, grid95) == -math.inf


# -- pointwise statistic -----------------------------------------------------

def test_n_transform_closed_form_at_identity(w11):
    req = TransformRequest("C_g_psi", 2.0, math.inf, Symbol.identity(),
                           Symbol.identity())
    r = 0.6
    pp = float(w11.phi_prime(np.array([r]))[0])
    lap = float(w11.laplacian(np.array([r]))[0])
    assert n_transform(w11, req, complex(r)) == \
        pytest.approx(r / (1.0 + pp) * math.sqrt(lap), rel=1e-14)
    # explicit t overrides the request exponent
    assert n_transform(w11, req, complex(r), t=0.0) == \
        pytest.approx(r / (1.0 + pp), rel=1e-14)


def test_n_transform_kernel_power_factor(w11, half):
    z = 0.5 + 0j
    base = TransformRequest("C_g_psi", 2.0, math.inf, half,
                            Symbol.constant(1.0))
    deriv = TransformRequest("C_psi_g", 2.0, math.inf, half,
                             Symbol.constant(1.0))
    ratio = n_transform(w11, deriv, z) / n_transform(w11, base, z)
    assert ratio == pytest.approx(
        1.0 + float(w11.phi_prime(np.array([0.25]))[0]), rel=1e-14)


# -- measures ----------------------------------------------------------------

def test_berezin_of_unit_atom(w11):
    mu = DiscreteMeasure(np.array([0j]), np.array([0.0]), w11, 2.0)
    assert berezin(w11, mu, 2.0, 0.4 + 0j) == \
        pytest.approx(LOG_G2_ATOM, abs=1e-13)
    with pytest.raises(ArgumentError):
        berezin(w11, mu, 0.0, 0.4 + 0j)


def test_measure_moment_of_empty_measure(w11):
    mu = DiscreteMeasure(np.array([], complex), np.array([]), w11, 2.0)
    assert measure_moment(w11, mu, 2.0, 2.0, 0.3 + 0j) == -math.inf


def test_averaging_window(w11):
    mu = DiscreteMeasure(np.array([0.5 + 0j]), np.array([math.log(3.0)]),
                         w11, 2.0)
    tau = float(w11.tau(np.array([0.5]))[0])
    assert averaging(w11, mu, 1.0, 0.5 + 0j) == \
        pytest.approx(3.0 / tau ** 2, rel=1e-13)
    assert averaging(w11, mu, 0.1, -0.5 + 0j) == 0.0


def test_embedding_function_single_atom(w11):
    a, mass = 0.5, 3.0
    mu = DiscreteMeasure(np.array([complex(a)]),
                         np.array([math.log(mass)]), w11, 2.0)
    pp = float(w11.phi_prime(np.array([a]))[0])
    om = math.exp(float(w11.log_omega(np.array([a]))[0]))
    tau = float(w11.tau(np.array([a]))[0])
    nu_mass = mass * (1.0 + pp) ** 2 / om
    got = embedding_function(w11, mu, 2.0, 2.0, 1.0,
                             np.array([complex(a)]))[0]
    assert got == pytest.approx(nu_mass / tau ** 2, rel=1e-12)
    # p = inf pins the tau exponent at 2 as well
    got_inf = embedding_function(w11, mu, math.inf, 2.0, 1.0,
                                 np.array([complex(a)]))[0]
    assert got_inf == pytest.approx(got, rel=1e-12)
    assert embedding_function(w11, mu, 2.0, 2.0, 0.05,
                              np.array([-0.5 + 0j]))[0] == 0.0


def test_embedding_constant_scans_centers(w11):
    mu = DiscreteMeasure(np.array([0.5 + 0j]), np.array([0.0]), w11, 2.0)
    centers = np.array([0.5 + 0j, -0.5 + 0j, 0.1j])
    rep = embedding_constant(w11, mu, 2.0, 2.0, 0.5, None, centers=centers)
    assert rep["argmax"] == 0.5 + 0j
    assert rep["n_active"] == 1
    assert rep["constant"] > 0.0


# -- norms -------------------------------------------------------------------

def test_sp_norm_of_constant(w11, grid99):
    assert sp_norm(w11, Symbol.constant(1.0), 2.0, grid99) == \
        pytest.approx(D2_1, rel=1e-12)
    with pytest.raises(ArgumentError):
        sp_norm(w11, Symbol.constant(1.0), 0.0, grid99)


def test_ap_norm_of_identity(w11, grid99):
    for p, v in AP_Z_P.items():
        assert ap_norm(w11, Symbol.identity(), p, grid99) ** p == \
            pytest.approx(v, rel=1e-12)


def test_ap_norm_sup_case(w11, grid95):
    got = ap_norm(w11, Symbol.constant(2.0), math.inf, grid95)
    assert got == pytest.approx(
        2.0 * math.exp(0.5 * float(np.max(grid95.log_omega))), rel=1e-13)


def test_lp_norm_monomials_match_pairing_moments(w11, grid99):
    assert lp_norm(w11, Symbol.identity(), 2.0, grid99) == \
        pytest.approx(D2_1, rel=1e-12)
    z3 = Symbol.polynomial([0.0, 0.0, 0.0, 1.0])
    assert lp_norm(w11, z3, 2.0, grid99) == pytest.approx(D2_3, rel=1e-12)


def test_lp_norm_constant_head(w11, grid95):
    assert lp_norm(w11, Symbol.constant(2.0), 3.0, grid95) == \
        pytest.approx(8.0, rel=1e-15)
    assert lp_norm(w11, Symbol.constant(2.0), 3.0, grid95,
                   verbatim_constant=True) == pytest.approx(2.0, rel=1e-15)
