"""Moment tables, kernel evaluation, and kernel norms.

Oracle values are mpmath (dps 40): moments by direct radial quadrature,
kernel values by summing the series sum_n (z conj(zeta))^n / c_n to 400
terms.  kernel_eval is analytic in its second argument, so it returns the
conjugate of that series; the complex literal below is stored as computed
by the oracle and conjugated in the assertion.
"""

import math

import numpy as np
import pytest

from bergmanops.errors import (ArgumentError, DomainError, NumericalError,
                               ResourceError)
from bergmanops.kernel import (get_table, kernel_diag_log, kernel_eval,
                               kernel_matrix, kernel_norm_band,
                               kernel_norm_log, lp_log_d2,
                               normalized_log_scales, required_degree,
                               surrogate_values)
from bergmanops.quadrature import build_grid, integrate_values

LOG_C_ORACLE = {
    0: 0.14849550677592205,
    1: 0.038803539578161911,
    2: 0.015174063704962502,
    5: 0.00214434638699693,
    50: 3.5744275503448944e-8,
    500: 3.6882819739170822e-22,
}
D2_ORACLE = {
    1: 0.049990065181267713,
    2: 0.028665294584876859,
    3: 0.016040627868353047,
    10: 0.00065137998824167487,
}
K_HALF_HALF = 21.282624858492909
K_HALF_03 = 12.73572182560187
K_COMPLEX = 11.318267233285442 + 3.8112436698264484j   # series convention
KDIAG_ORACLE = {
    0.0: 6.7342104937153964,
    0.3: 9.7099443300746864,
    0.6: 42.145406227685105,
    0.8: 751.59813448114075,
}


# 0.98 keeps the omega tail below 1e-20 for the radii used here while the
# node count stays a third of the 0.99 grid
@pytest.fixture(scope="module")
def grid98(w11):
    return build_grid(w11, 0.98, 1.0)


@pytest.fixture(scope="module")
def table(w11):
    return get_table(w11, 512)


# -- moment tables -----------------------------------------------------------

def test_moments_match_oracle(w11, table):
    for n, cn in LOG_C_ORACLE.items():
        assert math.exp(table.log_c[n]) == pytest.approx(cn, rel=1e-12)


def test_pairing_moments_match_oracle(table):
    assert table.log_d2[0] == 0.0
    for n, d2 in D2_ORACLE.items():
        assert math.exp(table.log_d2[n]) == pytest.approx(d2, rel=1e-12)


def test_lp_log_d2_is_a_prefix(w11, table):
    assert np.array_equal(lp_log_d2(w11, 10), table.log_d2[:11])


def test_get_table_grows_in_powers_of_two(w11, table):
    assert table.degree == 512
    assert get_table(w11, 100) is table      # cached, already large enough
    assert table.extend(100) is table
    big = get_table(w11, 513)
    assert big.degree == 1024


def test_log_c_is_convex(table):
    # convexity underpins the geometric tail bound in required_degree
    second = np.diff(table.log_c, 2)
    assert np.all(second > 0.0)


# -- degree selection --------------------------------------------------------

def test_required_degree_pins(w11):
    assert required_degree(w11, 0.0) == 0
    assert required_degree(w11, 0.5) == 39
    assert required_degree(w11, 0.9) == 376
    assert required_degree(w11, 0.95) == 952


def test_required_degree_truncation_is_converged(w11):
    rho = 0.9
    deg = required_degree(w11, rho)
    tab = get_table(w11, 2 * deg)
    n = np.arange(2 * deg + 1, dtype=float)
    terms = np.exp(2.0 * n * math.log(rho) - tab.log_c[:n.size])
    assert np.sum(terms[deg + 1:]) < 1e-15 * np.sum(terms)


def test_required_degree_rejects_bad_rho(w11):
    with pytest.raises(DomainError):
        required_degree(w11, 1.0)
    with pytest.raises(ResourceError):
        required_degree(w11, 0.9, cap=16)


# -- kernel values -----------------------------------------------------------

def test_kernel_values_match_series_oracle(w11):
    assert kernel_eval(w11, 0.5, 0.5) == pytest.approx(K_HALF_HALF, rel=1e-12)
    assert kernel_eval(w11, 0.5, 0.3) == pytest.approx(K_HALF_03, rel=1e-12)
    got = kernel_eval(w11, 0.4 + 0.2j, 0.35)
    assert got == pytest.approx(np.conj(K_COMPLEX), rel=1e-12)


def test_kernel_hermitian_symmetry(w11):
    z, zeta = 0.4 + 0.2j, 0.1 - 0.3j
    assert kernel_eval(w11, z, zeta) == \
        pytest.approx(np.conj(kernel_eval(w11, zeta, z)), rel=1e-14)


def test_kernel_diag_matches_oracle(w11):
    r = np.array(sorted(KDIAG_ORACLE), dtype=complex)
    got = np.exp(kernel_diag_log(w11, r))
    want = np.array([KDIAG_ORACLE[float(x.real)] for x in r])
    assert np.allclose(got, want, rtol=1e-12, atol=0)


def test_kernel_matrix_scales_and_guard(w11, table):
    z = np.array([0.4 + 0.1j])
    zeta = np.array([0.3 - 0.2j])
    base = kernel_matrix(table, z, zeta)[0, 0]
    doubled = kernel_matrix(table, z, zeta, log_row_scale=math.log(2.0))[0, 0]
    assert doubled == pytest.approx(2.0 * base, rel=1e-14)
    with pytest.raises(NumericalError):
        kernel_matrix(table, z, zeta, log_row_scale=400.0,
                      log_col_scale=400.0)


# -- norms -------------------------------------------------------------------

def test_parseval_identity_on_grid(w11, table, grid98):
    # int |K_z|^2 omega dA recovers the diagonal K(z, z); truncating the
    # disk at 0.98 leaves a ~1e-11 relative tail for z = 0.5
    z = 0.5
    row = kernel_matrix(table, np.array([complex(z)]), grid98.points)[0]
    val = integrate_values(grid98, np.abs(row) ** 2
                           * np.exp(grid98.log_omega)).real
    assert val == pytest.approx(K_HALF_HALF, rel=1e-10)


def test_reproducing_property(w11, table, grid98):
    z = 0.35 + 0.2j
    row = kernel_matrix(table, np.array([z]), grid98.points)[0]
    f = grid98.points ** 2 + 0.3 * grid98.points
    val = integrate_values(grid98, f * np.conj(row)
                           * np.exp(grid98.log_omega))
    assert val == pytest.approx(z ** 2 + 0.3 * z, abs=1e-10)


def test_norm_p2_reads_diagonal(w11):
    assert kernel_norm_log(w11, 0.6 + 0j, 2.0) == \
        pytest.approx(0.5 * math.log(KDIAG_ORACLE[0.6]), rel=1e-12)


def test_norm_band_p2_matches_diag_combination(w11):
    radii = np.array(sorted(KDIAG_ORACLE))
    band = kernel_norm_band(w11, 2.0, radii)
    diag = np.array([KDIAG_ORACLE[r] for r in radii])
    lap = np.asarray(w11.laplacian(radii), float)
    om = np.exp(np.asarray(w11.log_omega(radii), float))
    assert np.allclose(band.values ** 2, diag * om / lap, rtol=1e-12)
    assert band.low == pytest.approx(float(np.min(band.values)))
    assert band.high == pytest.approx(float(np.max(band.values)))


def test_norm_sup_case_dominates_samples(w11, rng):
    z = 0.55 + 0j
    sup_log = kernel_norm_log(w11, z, math.inf)
    for _ in range(16):
        r = rng.uniform(0.0, 0.95)
        theta = rng.uniform(0.0, 2.0 * np.pi)
        zeta = r * np.exp(1j * theta)
        val = abs(kernel_eval(w11, z, zeta)) \
            * math.exp(-float(w11.phi(np.array([r]))[0]))
        assert math.log(val) <= sup_log + 1e-12


def test_norm_grid_path_and_errors(w11, grid95):
    val = kernel_norm_log(w11, 0.4 + 0j, 4.0, grid=grid95)
    assert math.isfinite(val)
    with pytest.raises(ArgumentError):
        kernel_norm_log(w11, 0.4 + 0j, 4.0)
    with pytest.raises(ArgumentError):
        kernel_norm_log(w11, 0.4 + 0j, -1.0, grid=grid95)


def test_normalized_scales_cancel_diagonal(w11):
    z = np.array([0.2 + 0j, 0.5 + 0.3j])
    scales = normalized_log_scales(w11, z, 2.0)
    assert np.allclose(scales, -0.5 * kernel_diag_log(w11, z), rtol=1e-14)


def test_surrogate_has_unit_tau_norm(w11, grid98):
    a = 0.3 + 0.15j
    sv = surrogate_values(w11, a, grid98.points)
    nrm = math.sqrt(integrate_values(
        grid98, np.abs(sv) ** 2 * np.exp(grid98.log_omega)).real)
    tau_a = float(w11.tau(np.array([abs(a)]))[0])
    assert nrm == pytest.approx(tau_a, rel=1e-12)


# -- serialization -----------------------------------------------------------

def test_export_moments_round_trip(table, tmp_path):
    path = str(tmp_path / "moments.txt")
    from bergmanops.kernel import export_moments
    export_moments(table, path)
    data = np.loadtxt(path)
    assert data.shape == (table.degree + 1, 2)
    assert np.allclose(data[:, 1], table.log_c, rtol=0, atol=1e-15)
