"""Fractional differencing algebra and the fractional Beveridge-Nelson split.

All operators use the type II convention: observations before ``t = 1`` are
zero, so every operator is a finite lower-triangular convolution. Array index
``0`` corresponds to ``t = 1``.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy.signal import fftconvolve, lfilter

from .errors import DomainError, InvalidParameterError

# Direct convolution is exact enough and faster below this length.
_FFT_THRESHOLD = 4096


@dataclass(frozen=True)
class FracCoeffs:
    """Coefficients pi_0..pi_m of the expansion of (1 - L)^d."""

    d: float
    coeffs: np.ndarray

    def __len__(self):
        return len(self.coeffs)


def pi_coeffs(d: float, m: int) -> FracCoeffs:
    """Return pi_0(d), ..., pi_m(d) from the recursion pi_j = (j - d - 1)/j * pi_{j-1}."""
    d = float(d)
    if not np.isfinite(d):
        raise InvalidParameterError(f"fractional order must be finite, got {d}")
    if m < 0:
        raise InvalidParameterError(f"number of coefficients must be >= 0, got {m}")
    j = np.arange(1, m + 1, dtype=float)
    # cumprod multiplies left to right, same rounding as the scalar loop
    coeffs = np.empty(m + 1)
    coeffs[0] = 1.0
    coeffs[1:] = np.cumprod((j - d - 1.0) / j)
    return FracCoeffs(d, coeffs)


def as_series(y, name: str = "series") -> np.ndarray:
    y = np.asarray(y, dtype=float)
    if y.ndim != 1 or y.size == 0:
        raise InvalidParameterError(f"{name} must be a nonempty 1-d sequence")
    if not np.all(np.isfinite(y)):
        raise InvalidParameterError(f"{name} contains non-finite values")
    return y


def _causal_convolve(weights: np.ndarray, y: np.ndarray) -> np.ndarray:
    n = len(y)
    if n >= _FFT_THRESHOLD:
        return fftconvolve(weights[:n], y)[:n]
    return np.convolve(weights[:n], y)[:n]


def fracdiff(y, d: float) -> np.ndarray:
    """Truncated fractional difference: out[t] = sum_{i<t} pi_i(d) y[t-i]."""
    y = as_series(y)
    if d == 0:
        return y.copy()
    return _causal_convolve(pi_coeffs(d, len(y) - 1).coeffs, y)


def fracint(e, d: float) -> np.ndarray:
    """Truncated fractional integration, the inverse of ``fracdiff(., d)``."""
    return fracdiff(e, -d)


def impulse_response(d: float, horizon: int) -> np.ndarray:
    """Weight of a unit shock ``j`` periods later in an I(d) process, j = 0..horizon.

    For the growth rate of an I(d) level use ``d - 1``.
    """
    if horizon < 0:
        raise InvalidParameterError("horizon must be nonnegative")
    return pi_coeffs(-d, horizon).coeffs


# --------------------------------------------------------------------------
# fractional lag operator L_d = 1 - Delta_+^d


@dataclass(frozen=True)
class LagPolynomial:
    """phi(L_d) = 1 - phi_1 L_d - ... - phi_p L_d^p.

    ``stable_d`` records the order ``d`` for which :func:`stability_check`
    passed; it is ``None`` for an unchecked polynomial.
    """

    coeffs: Tuple[float, ...] = ()
    stable_d: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, "coeffs", tuple(float(c) for c in self.coeffs))

    @property
    def order(self) -> int:
        return len(self.coeffs)

    def verified(self, d: float, samples: int = 1000) -> "LagPolynomial":
        """Return a copy flagged stable for ``d``; raise DomainError otherwise."""
        if not stability_check(self, d, samples):
            raise DomainError(f"phi{self.coeffs} has a root inside the image C_d for d={d}")
        return replace(self, stable_d=float(d))

    def polyval(self, w):
        # np.polyval wants the highest power first
        c = np.concatenate([-np.asarray(self.coeffs[::-1]), [1.0]])
        return np.polyval(c, w)


def lag_d(y, d: float) -> np.ndarray:
    """Apply L_d: (L_d y)_t = -sum_{j=1}^{t-1} pi_j(d) y_{t-j}."""
    y = as_series(y)
    return y - fracdiff(y, d)


def lagpoly_apply(phi: LagPolynomial, d: float, y) -> np.ndarray:
    """Apply phi(L_d) to ``y``, computing powers of L_d by repeated application."""
    y = as_series(y)
    out = y.copy()
    power = y
    for c in phi.coeffs:
        power = lag_d(power, d)
        out -= c * power
    return out


def _series_reciprocal(a: np.ndarray) -> np.ndarray:
    """First len(a) coefficients of 1/a(z) for a power series with a[0] != 0."""
    n = len(a)
    r = np.zeros(n)
    r[0] = 1.0 / a[0]
    for j in range(1, n):
        r[j] = -np.dot(a[1 : j + 1], r[j - 1 :: -1][:j]) / a[0]
    return r


def _operator_series(phi_like: Sequence[float], d: float, n: int, sign: float) -> np.ndarray:
    """Coefficients of 1 + sign * sum_k c_k L_d^k acting on a length-n series."""
    impulse = np.zeros(n)
    impulse[0] = 1.0
    out = impulse.copy()
    power = impulse
    # L_d^k has no weight below lag k, so only k < n matter
    for c in list(phi_like)[: n - 1]:
        power = lag_d(power, d)
        out += sign * c * power
    return out


def lagpoly_solve(phi: LagPolynomial, d: float, z) -> np.ndarray:
    """Recover ``y`` from ``z = phi(L_d) y`` (the type II inverse of :func:`lagpoly_apply`)."""
    z = as_series(z)
    weights = _operator_series(phi.coeffs, d, len(z), -1.0)
    return _causal_convolve(_series_reciprocal(weights), z)


def lagpoly_invert(phi: LagPolynomial, d: float, m: int) -> np.ndarray:
    """L_d-power-series coefficients theta_0..theta_m of (1 - L_d) / phi(L_d).

    The division is carried out in the formal variable ``L_d``; ``d`` only
    enters through the stability requirement.
    """
    if m < 0:
        raise InvalidParameterError("m must be nonnegative")
    if phi.stable_d is None or phi.stable_d != d:
        if not stability_check(phi, d):
            raise DomainError(f"phi{phi.coeffs} is not stable for d={d}")
    impulse = np.zeros(m + 1)
    impulse[0] = 1.0
    denom = np.concatenate([[1.0], -np.asarray(phi.coeffs)])
    return lfilter([1.0, -1.0], denom, impulse)


def frac_disk_image(d: float, z):
    """Map points of the unit disk through z -> 1 - (1 - z)^d (principal branch)."""
    z = np.asarray(z, dtype=complex)
    return 1.0 - np.power(1.0 - z, d)


def stability_check(phi: LagPolynomial, d: float, samples: int = 1000,
                    radial: int = 200, tol: float = 1e-6) -> bool:
    """True iff phi(w) has no zero on the image C_d of the closed unit disk.

    Two numerical tests, either of which rejects: the winding number of
    phi along the sampled boundary image curve, and the minimum of |phi|
    over the image of a polar grid of the disk. Near-zero minima count as
    unstable.
    """
    if samples < 360:
        raise InvalidParameterError("stability_check needs at least 360 boundary samples")
    if phi.order == 0:
        return True
    theta = np.linspace(0.0, 2 * np.pi, samples, endpoint=False)
    boundary = frac_disk_image(d, np.exp(1j * theta))
    vals = phi.polyval(boundary)
    if np.min(np.abs(vals)) <= tol:
        return False
    turns = np.angle(np.roll(vals, -1) / vals).sum() / (2 * np.pi)
    if abs(turns) > 0.5:
        return False
    r = np.linspace(0.0, 1.0, radial)
    grid = frac_disk_image(d, r[:, None] * np.exp(1j * theta[None, :]))
    return bool(np.min(np.abs(phi.polyval(grid))) > tol)


# --------------------------------------------------------------------------
# fractional Beveridge-Nelson decomposition


@dataclass(frozen=True)
class BnDecomposition:
    trend: np.ndarray
    cycle: np.ndarray
    theta_u: np.ndarray
    sigma_u2: float


def aggregate_theta_u(theta_eps, Q) -> Tuple[np.ndarray, float]:
    """Reduced-form MA coefficients for eta_t + theta_eps(L_d) eps_t.

    Uses sigma_u^2 = s_eta^2 + s_eps^2 + 2 s_eta_eps and
    theta_u_j = theta_eps_j * s_eps / s_u for j >= 1. This matches the lag-0
    autocovariance for every Q; higher lags match only when
    s_u * s_eps = s_eps^2 + s_eta_eps (e.g. uncorrelated shocks with
    s_eps = 0, or a single common shock source).
    """
    theta_eps = np.asarray(theta_eps, dtype=float)
    Q = np.asarray(Q, dtype=float)
    if Q.shape != (2, 2) or not np.allclose(Q, Q.T):
        raise InvalidParameterError("Q must be a symmetric 2x2 matrix")
    if np.min(np.linalg.eigvalsh(Q)) < -1e-12 * max(1.0, np.abs(Q).max()):
        raise InvalidParameterError("Q must be positive semidefinite")
    if theta_eps.size == 0 or theta_eps[0] != 1.0:
        raise InvalidParameterError("theta_eps[0] must equal 1")
    sigma_u2 = Q[0, 0] + Q[1, 1] + 2 * Q[0, 1]
    if sigma_u2 <= 0:
        raise DomainError(f"reduced-form variance must be positive, got {sigma_u2}")
    theta_u = theta_eps * np.sqrt(Q[1, 1] / sigma_u2)
    theta_u[0] = 1.0
    return theta_u, float(sigma_u2)


def long_run_weight(theta_u, n: int) -> float:
    """theta_u(1), summed over at most 10 n terms and stopping at |theta_j| < 1e-12."""
    theta_u = np.asarray(theta_u, dtype=float)[: 10 * n]
    small = np.flatnonzero(np.abs(theta_u[1:]) < 1e-12)
    if small.size:
        theta_u = theta_u[: small[0] + 1]
    return float(theta_u.sum())


def reduced_form_innovations(y_adj, d: float, theta_u) -> np.ndarray:
    """Solve theta_u(L_d) u_t = Delta_+^d y_adj for the innovations ``u``."""
    y_adj = as_series(y_adj, "y_adj")
    theta_u = np.asarray(theta_u, dtype=float)
    weights = _operator_series(theta_u[1:], d, len(y_adj), 1.0)
    return _causal_convolve(_series_reciprocal(weights), fracdiff(y_adj, d))


def bn_decompose(y_adj, d: float, theta_u, sigma_u2: float, u) -> BnDecomposition:
    """Split ``y_adj`` into the fractional BN trend Delta_+^{-d}[theta_u(1) u_t] and the cycle."""
    y_adj = as_series(y_adj, "y_adj")
    u = as_series(u, "u")
    if len(u) != len(y_adj):
        raise InvalidParameterError(
            f"innovation length {len(u)} does not match series length {len(y_adj)}")
    trend = fracint(long_run_weight(theta_u, len(y_adj)) * u, d)
    return BnDecomposition(trend, y_adj - trend, np.asarray(theta_u, dtype=float), float(sigma_u2))
