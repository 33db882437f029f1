"""Model-implied covariances of y_t = x_t + u_t, x_t = Delta_+^{-d} eta_t, and
one-step prediction.

Time runs in ascending order internally (index 0 is t = 1). The reversed
``y_{t:1}`` layout only appears in :func:`direct_solve_oracle` and
:func:`reversed_cov_yy`.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Tuple

import numpy as np
from scipy import linalg

from .errors import InvalidParameterError, NumericalDegeneracyError, ResourceError
from .fracops import as_series, pi_coeffs

D_MAX = 2.5
MAX_DENSE_N = 20_000


@dataclass(frozen=True)
class ThetaParams:
    """Parameters (d, sigma_eta^2, sigma_u^2) of the fractional UC model."""

    d: float
    sigma_eta2: float
    sigma_u2: float
    d_max: float = D_MAX

    def __post_init__(self):
        for name in ("d", "sigma_eta2", "sigma_u2"):
            object.__setattr__(self, name, float(getattr(self, name)))
        if not (np.isfinite(self.d) and 0 < self.d <= self.d_max):
            raise InvalidParameterError(f"d must lie in (0, {self.d_max}], got {self.d}")
        if not (np.isfinite(self.sigma_eta2) and self.sigma_eta2 > 0):
            raise InvalidParameterError(f"sigma_eta2 must be positive, got {self.sigma_eta2}")
        if not (np.isfinite(self.sigma_u2) and self.sigma_u2 > 0):
            raise InvalidParameterError(f"sigma_u2 must be positive, got {self.sigma_u2}")

    @property
    def ratio(self) -> float:
        """Signal-to-noise ratio sigma_eta^2 / sigma_u^2."""
        return self.sigma_eta2 / self.sigma_u2

    def as_array(self) -> np.ndarray:
        return np.array([self.d, self.sigma_eta2, self.sigma_u2])

    def scaled(self, c: float) -> "ThetaParams":
        return ThetaParams(self.d, c * self.sigma_eta2, c * self.sigma_u2, self.d_max)


def _check_size(n: int):
    if n < 1:
        raise InvalidParameterError("n must be at least 1")
    if n > MAX_DENSE_N:
        raise ResourceError(f"refusing to materialize a {n}x{n} covariance (cap {MAX_DENSE_N})")


def ma_matrix(d: float, n: int) -> np.ndarray:
    """Lower-triangular Toeplitz P with P[i, j] = pi_{i-j}(-d), so x = P eta."""
    return linalg.toeplitz(pi_coeffs(-d, n - 1).coeffs, np.zeros(n))


def cov_xx(theta: ThetaParams, n: int) -> np.ndarray:
    """Var(x_1..x_n) = sigma_eta^2 P P'."""
    _check_size(n)
    P = ma_matrix(theta.d, n)
    return theta.sigma_eta2 * (P @ P.T)


def cov_yy(theta: ThetaParams, n: int) -> np.ndarray:
    """Var(y_1..y_n) in ascending time order."""
    S = cov_xx(theta, n)
    S[np.diag_indices(n)] += theta.sigma_u2
    return S


def cov_xy(theta: ThetaParams, t: int, n: int) -> np.ndarray:
    """Cov(x_t, y_j) for j = 1..n (1-based ``t``)."""
    _check_size(n)
    if not 1 <= t <= n:
        raise InvalidParameterError(f"t={t} outside 1..{n}")
    pi = pi_coeffs(-theta.d, n - 1).coeffs
    out = np.zeros(n)
    for j in range(1, n + 1):
        m = min(t, j)
        s = np.arange(1, m + 1)
        out[j - 1] = np.dot(pi[t - s], pi[j - s])
    return theta.sigma_eta2 * out


def reversed_cov_yy(theta: ThetaParams, t: int) -> np.ndarray:
    """Var(y_t, ..., y_1) built entry by entry in reversed time order (test oracle)."""
    pi = pi_coeffs(-theta.d, t).coeffs
    S = np.empty((t, t))
    for i in range(1, t + 1):
        for j in range(1, t + 1):
            if i == j:
                S[i - 1, j - 1] = theta.sigma_u2 + theta.sigma_eta2 * np.sum(pi[: t - i + 1] ** 2)
            else:
                k = np.arange(0, t - max(i, j) + 1)
                S[i - 1, j - 1] = theta.sigma_eta2 * np.sum(pi[k] * pi[k + abs(i - j)])
    return S


def reversed_cov_eta_y(theta: ThetaParams, t: int) -> np.ndarray:
    """Cov(eta_{t:1}, y_{t:1}): pi_{i-j}(-d) sigma_eta^2 for i >= j, else 0."""
    pi = pi_coeffs(-theta.d, t).coeffs
    S = np.zeros((t, t))
    for i in range(1, t + 1):
        for j in range(1, i + 1):
            S[i - 1, j - 1] = pi[i - j] * theta.sigma_eta2
    return S


def _cholesky(S: np.ndarray) -> np.ndarray:
    try:
        return linalg.cholesky(S, lower=True, check_finite=False)
    except linalg.LinAlgError as exc:
        # LAPACK reports the order of the first non-positive leading minor
        step = None
        msg = str(exc)
        digits = "".join(ch for ch in msg.split("-th")[0] if ch.isdigit())
        if digits:
            step = int(digits)
        raise NumericalDegeneracyError(
            f"covariance not positive definite at step {step}", step=step) from exc


@dataclass(frozen=True)
class Innovations:
    """One-step predictions yhat_t = E(y_t | F_{t-1}), errors v_t and their variances."""

    yhat: np.ndarray
    v: np.ndarray
    mse: np.ndarray
    forecast: float
    forecast_mse: float


def innovations(theta: ThetaParams, y, horizon_plus_one: bool = True) -> Innovations:
    """Innovations algorithm on Var(y) via its LDL' factorization.

    With Var(y_1..y_{n+1}) = C C', the innovation of y_t is C[t, t] z_t where
    z = C^{-1} y, and yhat_t = C[t, :t] z[:t]. Row n + 1 of the factor does
    not involve y_{n+1}, so it also yields the forecast E(y_{n+1} | F_n).
    """
    y = as_series(y)
    n = len(y)
    m = n + 1 if horizon_plus_one else n
    C = _cholesky(cov_yy(theta, m))
    diag = np.diag(C)
    z = linalg.solve_triangular(C[:n, :n], y, lower=True, check_finite=False)
    v = diag[:n] * z
    forecast, forecast_mse = np.nan, np.nan
    if horizon_plus_one:
        forecast = float(C[n, :n] @ z)
        forecast_mse = float(diag[n] ** 2)
    return Innovations(y - v, v, diag[:n] ** 2, forecast, forecast_mse)


def innovations_predict(theta: ThetaParams, y) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Return (yhat, v, mse) with yhat[0] = 0 under the zero pre-sample convention."""
    res = innovations(theta, y, horizon_plus_one=False)
    return res.yhat, res.v, res.mse


def direct_solve_oracle(theta: ThetaParams, y, t: int) -> float:
    """E(x_{t+1} | F_t) from the reversed-order covariance blocks and a dense solve.

    O(t^3). The row sum over pi_i(-d) Cov(eta_{t+1-i}, y_{t:1}) is solved
    against Var(y_{t:1}) literally. If the Cholesky factorization fails, a
    1e-12 * trace / t diagonal jitter is added once.
    """
    y = as_series(y)
    if not 1 <= t < len(y) + 1:
        raise InvalidParameterError(f"t={t} outside 1..{len(y)}")
    y_rev = y[:t][::-1]
    S_y = reversed_cov_yy(theta, t)
    S_ey = reversed_cov_eta_y(theta, t)
    pi = pi_coeffs(-theta.d, t).coeffs
    row = pi[1 : t + 1] @ S_ey
    try:
        cf = linalg.cho_factor(S_y, lower=True)
    except linalg.LinAlgError:
        S_y = S_y + np.eye(t) * 1e-12 * np.trace(S_y) / t
        try:
            cf = linalg.cho_factor(S_y, lower=True)
        except linalg.LinAlgError as exc:
            raise NumericalDegeneracyError("singular system in direct solve", step=t) from exc
    return float(row @ linalg.cho_solve(cf, y_rev))


def identification_system(d: float, t: int) -> np.ndarray:
    """2x2 map from (sigma_eta^2, sigma_u^2) to the lag-0 and lag-1 autocovariances
    of Delta_+^d y at time t."""
    if t < 2:
        raise InvalidParameterError("need t >= 2 for a lag-1 autocovariance")
    pi = pi_coeffs(d, t).coeffs
    return np.array([[1.0, np.sum(pi[:t] ** 2)],
                     [0.0, np.sum(pi[: t - 1] * pi[1:t])]])


def recover_variances(d: float, t: int, gamma0: float, gamma1: float) -> Tuple[float, float]:
    """Invert :func:`identification_system` for (sigma_eta^2, sigma_u^2)."""
    A = identification_system(d, t)
    sol = linalg.solve(A, [gamma0, gamma1])
    return float(sol[0]), float(sol[1])
