import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st
from matplotlib.path import Path
from scipy import linalg, special

from fracuc.errors import DomainError, InvalidParameterError
from fracuc.fracops import (LagPolynomial, aggregate_theta_u, bn_decompose, frac_disk_image,
                            fracdiff, fracint, impulse_response, lag_d, lagpoly_apply,
                            lagpoly_invert, lagpoly_solve, long_run_weight, pi_coeffs,
                            reduced_form_innovations, stability_check)

orders = st.floats(min_value=-2.4, max_value=2.4, allow_nan=False)


@pytest.mark.parametrize("d", [0.3, 0.75, 1.25, 1.9, -0.4, 2.5])
def test_pi_coeffs_match_binomial(d):
    j = np.arange(60)
    expected = (-1.0) ** j * special.binom(d, j)
    np.testing.assert_allclose(pi_coeffs(d, 59).coeffs, expected, rtol=1e-12, atol=1e-15)


def test_pi_coeffs_integer_orders_truncate():
    np.testing.assert_array_equal(pi_coeffs(1, 4).coeffs, [1, -1, 0, 0, 0])
    np.testing.assert_array_equal(pi_coeffs(2, 4).coeffs, [1, -2, 1, 0, 0])
    np.testing.assert_array_equal(pi_coeffs(0.7, 0).coeffs, [1.0])


def test_pi_coeffs_rejects_bad_input():
    with pytest.raises(InvalidParameterError):
        pi_coeffs(np.nan, 3)
    with pytest.raises(InvalidParameterError):
        pi_coeffs(0.5, -1)


@pytest.mark.parametrize("d", [0.4, 0.8, 1.3])
def test_impulse_weights_decay_like_power_law(d):
    j = 5000
    w = impulse_response(d, j)
    assert w[j] == pytest.approx(j ** (d - 1) / special.gamma(d), rel=1e-3)


def test_fracdiff_integer_orders():
    y = np.array([1.0, 4.0, 9.0, 16.0, 25.0])
    np.testing.assert_array_equal(fracdiff(y, 0), y)
    np.testing.assert_allclose(fracdiff(y, 1), [1, 3, 5, 7, 9])
    np.testing.assert_allclose(fracdiff(y, 2), [1, 2, 2, 2, 2])


@settings(max_examples=50, deadline=None)
@given(d=orders, seed=st.integers(0, 2 ** 16))
def test_fracint_inverts_fracdiff(d, seed):
    y = np.random.default_rng(seed).standard_normal(80)
    np.testing.assert_allclose(fracint(fracdiff(y, d), d), y, atol=1e-8 * (1 + 80 ** abs(d)))


def test_fft_path_matches_direct():
    y = np.random.default_rng(0).standard_normal(5000)
    direct = np.convolve(pi_coeffs(0.7, 4999).coeffs, y)[:5000]
    np.testing.assert_allclose(fracdiff(y, 0.7), direct, atol=1e-9)


def test_as_series_validation():
    for bad in ([], [[1.0, 2.0]], [1.0, np.inf]):
        with pytest.raises(InvalidParameterError):
            fracdiff(bad, 0.5)


def _lag_matrix(d, n):
    return np.eye(n) - linalg.toeplitz(pi_coeffs(d, n - 1).coeffs, np.zeros(n))


def test_lagpoly_apply_and_solve_against_matrices():
    n, d = 40, 1.3
    phi = LagPolynomial((0.5, -0.2))
    M = _lag_matrix(d, n)
    A = np.eye(n) - 0.5 * M + 0.2 * M @ M
    y = np.random.default_rng(1).standard_normal(n)
    np.testing.assert_allclose(lag_d(y, d), M @ y, atol=1e-12)
    np.testing.assert_allclose(lagpoly_apply(phi, d, y), A @ y, atol=1e-10)
    z = A @ y
    np.testing.assert_allclose(lagpoly_solve(phi, d, z),
                               linalg.solve_triangular(A, z, lower=True), atol=1e-9)


def test_lagpoly_invert_series_identity():
    phi = LagPolynomial((0.6, 0.1))
    theta = lagpoly_invert(phi, 1.0, 30)
    prod = np.convolve([1.0, -0.6, -0.1], theta)[:31]
    expected = np.zeros(31)
    expected[:2] = [1.0, -1.0]
    np.testing.assert_allclose(prod, expected, atol=1e-14)


def test_lagpoly_invert_rejects_unstable():
    with pytest.raises(DomainError):
        lagpoly_invert(LagPolynomial((1.5,)), 1.0, 5)
    with pytest.raises(DomainError):
        LagPolynomial((1.5,)).verified(1.0)
    assert LagPolynomial((0.5,)).verified(1.0).stable_d == 1.0


def test_stability_requires_enough_samples():
    with pytest.raises(InvalidParameterError):
        stability_check(LagPolynomial((0.5,)), 1.0, samples=100)
    assert stability_check(LagPolynomial(()), 1.7)


def _roots_inside_image(coeffs, d):
    roots = np.roots(np.concatenate([-np.asarray(coeffs[::-1]), [1.0]]))
    if roots.size == 0:
        return False, np.inf
    theta = np.linspace(0, 2 * np.pi, 4000, endpoint=False)
    curve = frac_disk_image(d, np.exp(1j * theta))
    path = Path(np.column_stack([curve.real, curve.imag]))
    pts = np.column_stack([roots.real, roots.imag])
    # distance to the curve, so near-boundary draws can be skipped
    gap = np.min(np.abs(roots[:, None] - curve[None, :]), axis=1)
    return bool(np.any(path.contains_points(pts))), float(np.min(gap))


@settings(max_examples=60, deadline=None)
@given(d=st.floats(0.3, 2.0), c=st.lists(st.floats(-1.5, 1.5).map(lambda v: round(v, 3)), min_size=1, max_size=3))
def test_stability_check_agrees_with_root_location(d, c):
    inside, gap = _roots_inside_image(c, d)
    assume(gap > 0.05)
    assert stability_check(LagPolynomial(tuple(c)), d) == (not inside)


@pytest.mark.parametrize("a1,stable", [(0.5, True), (0.99, True), (1.01, False), (-1.2, False)])
def test_stability_at_unit_order_is_classical_ar(a1, stable):
    assert stability_check(LagPolynomial((a1,)), 1.0) is stable


def test_aggregate_theta_u_lag0_variance():
    Q = np.array([[0.5, 0.1], [0.1, 0.8]])
    theta_eps = lagpoly_invert(LagPolynomial((0.4,)), 1.2, 10)
    theta_u, s2 = aggregate_theta_u(theta_eps, Q)
    assert s2 == pytest.approx(0.5 + 0.8 + 0.2)
    assert theta_u[0] == 1.0
    np.testing.assert_allclose(theta_u[1:], theta_eps[1:] * np.sqrt(0.8 / s2))


def test_aggregate_theta_u_validation():
    good = np.array([1.0, -0.5])
    with pytest.raises(InvalidParameterError):
        aggregate_theta_u(good, [[1.0, 2.0], [2.0, 1.0]])
    with pytest.raises(InvalidParameterError):
        aggregate_theta_u([0.5, 0.1], np.eye(2))
    with pytest.raises(DomainError):
        aggregate_theta_u(good, [[1.0, -1.0], [-1.0, 1.0]])


def test_long_run_weight_truncates():
    assert long_run_weight([1.0, -0.4, 0.0, 0.3], 10) == pytest.approx(0.6)
    geo = np.concatenate([[1.0], 0.5 ** np.arange(1, 200)])
    assert long_run_weight(geo, 50) == pytest.approx(2.0, abs=1e-11)


def test_bn_reconstructs_and_checks_lengths():
    rng = np.random.default_rng(3)
    y = np.cumsum(rng.standard_normal(100))
    theta_u, s2 = aggregate_theta_u(lagpoly_invert(LagPolynomial((0.3,)), 0.9, 99),
                                    np.diag([0.2, 1.0]))
    u = reduced_form_innovations(y, 0.9, theta_u)
    bn = bn_decompose(y, 0.9, theta_u, s2, u)
    np.testing.assert_allclose(bn.trend + bn.cycle, y, atol=1e-12)
    with pytest.raises(InvalidParameterError):
        bn_decompose(y, 0.9, theta_u, s2, u[:-1])
