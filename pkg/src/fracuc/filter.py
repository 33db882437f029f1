"""Fractional filter, CSS objective and full-sample smoother."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Tuple

import numpy as np
from scipy import linalg, stats

from .errors import InvalidParameterError
from .fracops import as_series
from .gausscov import ThetaParams, _cholesky, cov_xx, cov_yy, innovations


@dataclass(frozen=True)
class FilterOutput:
    """Filter results. ``x_pred[t]`` is E(x_{t+2} | F_{t+1}) in 0-based indexing,
    i.e. entry t predicts the next period. ``mse`` holds Var(v_t)."""

    x_pred: np.ndarray
    v: np.ndarray
    mse: np.ndarray
    css: float
    loglik_proxy: float


@dataclass(frozen=True)
class SmoothOutput:
    x_smooth: np.ndarray
    residual: np.ndarray


def css_value(v) -> float:
    v = np.asarray(v, dtype=float)
    return float(np.mean(v * v))


def run_filter(theta: ThetaParams, y) -> FilterOutput:
    """Prediction errors and one-step latent predictions for a deterministic-adjusted ``y``.

    ``loglik_proxy`` is -n/2 log(css). It is only proportional to a
    concentrated Gaussian likelihood and is meant for rough comparisons.
    """
    y = as_series(y)
    res = innovations(theta, y)
    # E(x_{t+1} | F_t) = E(y_{t+1} | F_t)
    x_pred = np.append(res.yhat[1:], res.forecast)
    css = css_value(res.v)
    return FilterOutput(x_pred, res.v, res.mse, css, -0.5 * len(y) * np.log(css))


def css_objective(theta: ThetaParams, y) -> float:
    return css_value(innovations(theta, y, horizon_plus_one=False).v)


def run_smoother(theta: ThetaParams, y) -> SmoothOutput:
    """x_{t|n} = Cov(x_t, y) Var(y)^{-1} y for all t from one factorization."""
    y = as_series(y)
    n = len(y)
    C = _cholesky(cov_yy(theta, n))
    w = linalg.cho_solve((C, True), y, check_finite=False)
    x_smooth = cov_xx(theta, n) @ w
    return SmoothOutput(x_smooth, y - x_smooth)


def smoother_r2(x_true, x_smooth) -> Tuple[float, float]:
    """Mean squared error and R^2 of a latent-component estimate."""
    x_true = as_series(x_true, "x_true")
    x_smooth = as_series(x_smooth, "x_smooth")
    if len(x_true) != len(x_smooth):
        raise InvalidParameterError("x_true and x_smooth differ in length")
    err = x_true - x_smooth
    denom = np.sum((x_true - x_true.mean()) ** 2)
    if denom == 0:
        raise InvalidParameterError("R^2 undefined for a constant x_true")
    return float(np.mean(err ** 2)), float(1.0 - np.sum(err ** 2) / denom)


def ljung_box(v, lags: int = 20, fitted_params: int = 0) -> Tuple[float, float]:
    """Portmanteau statistic Q = n(n+2) sum_k r_k^2/(n-k) and its chi-square p-value."""
    v = as_series(v)
    n = len(v)
    if not 1 <= lags < n:
        raise InvalidParameterError("lags must be in 1..n-1")
    r = sample_acf(v, lags)[1:]
    k = np.arange(1, lags + 1)
    q = n * (n + 2) * np.sum(r ** 2 / (n - k))
    return float(q), float(stats.chi2.sf(q, lags - fitted_params))


def sample_acf(v, lags: int) -> np.ndarray:
    v = np.asarray(v, dtype=float) - np.mean(v)
    denom = np.dot(v, v)
    return np.array([1.0] + [np.dot(v[k:], v[:-k]) / denom for k in range(1, lags + 1)])
