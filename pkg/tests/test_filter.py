import numpy as np
import pytest

from fracuc.errors import InvalidParameterError
from fracuc.filter import (css_objective, ljung_box, run_filter, run_smoother, sample_acf,
                           smoother_r2)
from fracuc.gausscov import ThetaParams
from fracuc.mc import simulate_dgp


def local_level_kalman(y, s_eta, s_u):
    """Textbook Kalman filter for x_t = x_{t-1} + eta_t, x_0 = 0, y_t = x_t + u_t."""
    a, P = 0.0, 0.0
    v, F, pred, filt = [], [], [], []
    for obs in y:
        P = P + s_eta
        f = P + s_u
        e = obs - a
        k = P / f
        a, P = a + k * e, P * (1 - k)
        v.append(e)
        F.append(f)
        pred.append(a)  # E(x_{t+1} | F_t) = E(x_t | F_t) for a random walk
        filt.append(a)
    return np.array(v), np.array(F), np.array(pred), np.array(filt)


def test_unit_order_matches_kalman_filter():
    th = ThetaParams(1.0, 0.4, 1.5)
    y, _ = simulate_dgp(th, 120, 1)
    out = run_filter(th, y)
    v, F, pred, filt = local_level_kalman(y, 0.4, 1.5)
    np.testing.assert_allclose(out.v, v, atol=1e-9)
    np.testing.assert_allclose(out.mse, F, rtol=1e-9)
    np.testing.assert_allclose(out.x_pred, pred, atol=1e-9)
    # the smoothed value at the last date is the filtered one
    assert run_smoother(th, y).x_smooth[-1] == pytest.approx(filt[-1], abs=1e-9)


def test_filter_outputs_are_consistent():
    th = ThetaParams(1.4, 0.2, 0.6)
    y, _ = simulate_dgp(th, 60, 2)
    out = run_filter(th, y)
    assert out.css == pytest.approx(np.mean(out.v ** 2))
    assert out.loglik_proxy == pytest.approx(-30 * np.log(out.css))
    assert css_objective(th, y) == pytest.approx(out.css)
    assert css_objective(th.scaled(3.0), y) == pytest.approx(out.css, rel=1e-10)


def test_smoother_tracks_low_noise_signal():
    th = ThetaParams(1.2, 1.0, 1e-6)
    y, x = simulate_dgp(th, 80, 3)
    sm = run_smoother(th, y)
    np.testing.assert_allclose(sm.x_smooth, x, atol=1e-2)
    np.testing.assert_allclose(sm.residual, y - sm.x_smooth)
    _, r2 = smoother_r2(x, sm.x_smooth)
    assert r2 > 0.9999


def test_smoother_r2_values():
    x = np.array([1.0, 2.0, 3.0, 4.0])
    assert smoother_r2(x, x) == (0.0, 1.0)
    mse, r2 = smoother_r2(x, x + 1)
    assert mse == 1.0 and r2 == pytest.approx(1 - 4 / 5)
    with pytest.raises(InvalidParameterError):
        smoother_r2(np.ones(4), x)
    with pytest.raises(InvalidParameterError):
        smoother_r2(x, x[:3])


def test_ljung_box_hand_computed():
    v = np.array([1.0, -1.0, 2.0, 0.0, -2.0, 1.0])
    r = sample_acf(v, 2)
    c = v - v.mean()
    assert r[1] == pytest.approx(np.dot(c[1:], c[:-1]) / np.dot(c, c))
    q, p = ljung_box(v, lags=2)
    assert q == pytest.approx(6 * 8 * (r[1] ** 2 / 5 + r[2] ** 2 / 4))
    assert 0 <= p <= 1
    with pytest.raises(InvalidParameterError):
        ljung_box(v, lags=6)


def test_ljung_box_matches_statsmodels():
    sm = pytest.importorskip("statsmodels.stats.diagnostic")
    e = np.random.default_rng(0).standard_normal(300)
    q, p = ljung_box(e, 20)
    ref = sm.acorr_ljungbox(e, [20])
    assert q == pytest.approx(float(ref["lb_stat"].iloc[0]))
    assert p == pytest.approx(float(ref["lb_pvalue"].iloc[0]))
