"""Contact-rate measurement from SIR case counts and epidemiological read-outs.

Counts are converted to population fractions on ingestion. Series indices
follow the dates of the :class:`CaseSeries` they were derived from.
"""
from __future__ import annotations

import datetime as dt
from dataclasses import dataclass, replace
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .errors import (DateGapError, DegenerateStateError, FracUCError, InvalidParameterError,
                     NonMonotoneError, NonPositiveIncrementError)
from .estimate import (EstimationConfig, FitReport, adjust, css_fit, deterministic_fit,
                       elw_bandwidth, elw_estimate, fit_uc)
from .filter import run_filter, run_smoother
from .fracops import as_series
from .gausscov import ThetaParams

START_THRESHOLD = 100


@dataclass(frozen=True)
class CaseSeries:
    """Daily cumulative confirmed, recovered and deceased counts for one region."""

    dates: Tuple[dt.date, ...]
    confirmed: np.ndarray
    recovered: np.ndarray
    deceased: np.ndarray
    population: float

    def __post_init__(self):
        object.__setattr__(self, "dates", tuple(self.dates))
        for name in ("confirmed", "recovered", "deceased"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=float))

    def __len__(self):
        return len(self.dates)

    def validate(self, tol: float = 1e-9) -> "CaseSeries":
        """Check the invariants; raise the matching input error on the first violation."""
        n = len(self.dates)
        if not (len(self.confirmed) == len(self.recovered) == len(self.deceased) == n):
            raise InvalidParameterError("count columns and dates differ in length")
        if not self.population > 0:
            raise InvalidParameterError("population must be positive")
        for i in range(1, n):
            if (self.dates[i] - self.dates[i - 1]).days != 1:
                raise DateGapError(f"dates not consecutive at {self.dates[i].isoformat()}")
        for name in ("confirmed", "recovered", "deceased"):
            col = getattr(self, name)
            if np.any(col < 0):
                raise NonMonotoneError(f"negative {name} count")
            bad = np.flatnonzero(np.diff(col) < -tol)
            if bad.size:
                raise NonMonotoneError(
                    f"cumulative {name} decreases on {self.dates[bad[0] + 1].isoformat()}")
        over = np.flatnonzero(self.recovered + self.deceased > self.confirmed * (1 + tol) + tol)
        if over.size:
            raise InvalidParameterError(
                f"recovered + deceased exceed confirmed on {self.dates[over[0]].isoformat()}")
        return self

    def slice(self, start: int, stop: Optional[int] = None) -> "CaseSeries":
        s = slice(start, stop)
        return replace(self, dates=self.dates[s], confirmed=self.confirmed[s],
                       recovered=self.recovered[s], deceased=self.deceased[s])

    def fractions(self) -> Tuple[np.ndarray, np.ndarray]:
        """Susceptible and infected population shares (S_t, I_t)."""
        S = 1.0 - self.confirmed / self.population
        I = (self.confirmed - self.recovered - self.deceased) / self.population
        return S, I


@dataclass(frozen=True)
class Measurement:
    log_y: np.ndarray
    start_date: dt.date
    weekday_of_start: int
    # row of the source CaseSeries holding t = 1
    offset: int = 0

    @property
    def dates(self) -> List[dt.date]:
        return [self.start_date + dt.timedelta(days=i) for i in range(len(self.log_y))]


def build_measurement(cases: CaseSeries, threshold: float = START_THRESHOLD) -> Measurement:
    """log Y_t with Y_t = Delta C_t / (I_{t-1} S_{t-1}), starting once C_t >= threshold.

    The first entry needs the previous day's state, so when the threshold
    is reached on the very first row the series starts one day later.
    """
    reached = np.flatnonzero(cases.confirmed >= threshold)
    if reached.size == 0:
        raise InvalidParameterError(f"cumulative cases never reach {threshold}")
    first = max(int(reached[0]), 1)
    S, I = cases.fractions()
    dC = np.diff(cases.confirmed) / cases.population
    for k in range(first, len(cases)):
        if not dC[k - 1] > 0:
            raise NonPositiveIncrementError(
                f"non-positive case increment on {cases.dates[k].isoformat()}; "
                "consider zero_delta_adjust", date=cases.dates[k], index=k)
        if not I[k - 1] > 0:
            raise DegenerateStateError(
                f"no currently infected on {cases.dates[k - 1].isoformat()}")
    Y = dC[first - 1 :] / (I[first - 1 : -1] * S[first - 1 : -1])
    start = cases.dates[first]
    return Measurement(np.log(Y), start, start.weekday(), first)


def simulate_sir(beta, gamma_r: float, gamma_d: float, i0: float, population: float,
                 start: dt.date, c0: Optional[float] = None) -> CaseSeries:
    """Forward-run the discrete SIR model with deaths for a given contact-rate path.

    ``beta[k]`` drives the step from day k to day k + 1, so the returned
    series has ``len(beta) + 1`` days. ``i0`` and ``c0`` are initial counts.
    """
    beta = np.asarray(beta, dtype=float)
    n = len(beta) + 1
    I = np.empty(n)
    R = np.empty(n)
    D = np.empty(n)
    C = np.empty(n)
    c0 = i0 if c0 is None else c0
    I[0], C[0] = i0 / population, c0 / population
    R[0] = (c0 - i0) / population * gamma_r / (gamma_r + gamma_d) if c0 > i0 else 0.0
    D[0] = (c0 - i0) / population - R[0] if c0 > i0 else 0.0
    for t in range(1, n):
        S_prev = 1.0 - C[t - 1]
        new = beta[t - 1] * S_prev * I[t - 1]
        D[t] = D[t - 1] + gamma_d * I[t - 1]
        R[t] = R[t - 1] + gamma_r * I[t - 1]
        I[t] = I[t - 1] + new - (gamma_r + gamma_d) * I[t - 1]
        C[t] = C[t - 1] + new
    dates = [start + dt.timedelta(days=i) for i in range(n)]
    return CaseSeries(dates, C * population, R * population, D * population, population)


def zero_delta_adjust(cases: CaseSeries, t: int) -> CaseSeries:
    """Fill a zero increment at row ``t`` from its neighbours.

    The increment becomes (dC_{t-1} + dC_{t+1}) / 3 and both neighbours keep
    2/3 of theirs, so the cumulative count after t + 1 is unchanged.
    """
    C = cases.confirmed.copy()
    if not 2 <= t <= len(C) - 2:
        raise InvalidParameterError("zero_delta_adjust needs a full three-day window")
    d_prev, d_now, d_next = C[t - 1] - C[t - 2], C[t] - C[t - 1], C[t + 1] - C[t]
    if not (d_now == 0 and d_prev > 0 and d_next > 0):
        raise InvalidParameterError(
            f"expected zero increment between positive neighbours at row {t}")
    new = np.array([2 * d_prev / 3, (d_prev + d_next) / 3, 2 * d_next / 3])
    C[t - 1 : t + 2] = C[t - 2] + np.cumsum(new)
    return replace(cases, confirmed=C)


def synth_recovered(cases: CaseSeries, h_bar: int = 21) -> CaseSeries:
    """Replace recovered counts by max(C_{t - h_bar} - D_t, 0)."""
    n = len(cases)
    if not 0 < h_bar < n:
        raise InvalidParameterError(f"h_bar must be in 1..{n - 1}")
    lagged = np.concatenate([np.zeros(h_bar), cases.confirmed[:-h_bar]])
    return replace(cases, recovered=np.maximum(lagged - cases.deceased, 0.0))


def underreporting_diag(cases: CaseSeries, lags: Sequence[int]) -> Dict[int, np.ndarray]:
    """C_{t-h} - R_t - D_t for each lag h (pre-sample confirmed counts are zero)."""
    out = {}
    for h in lags:
        if not 0 <= h < len(cases):
            raise InvalidParameterError(f"lag {h} out of range")
        lagged = np.concatenate([np.zeros(h), cases.confirmed[: len(cases) - h]])
        out[int(h)] = lagged - cases.recovered - cases.deceased
    return out


def gamma_hat(beta_hat, cases: CaseSeries) -> float:
    """Average of beta_t S_{t-1} - Delta I_t / I_{t-1} over t = 2..n.

    ``cases`` must hold the same days as ``beta_hat``.
    """
    beta_hat = as_series(beta_hat, "beta_hat")
    if len(beta_hat) != len(cases) or len(cases) < 2:
        raise InvalidParameterError("beta_hat and cases must be aligned with length >= 2")
    S, I = cases.fractions()
    if np.any(I[:-1] <= 0):
        raise DegenerateStateError("I_{t-1} = 0 in gamma estimate")
    return float(np.mean(beta_hat[1:] * S[:-1] - np.diff(I) / I[:-1]))


def reproduction_rate(beta_hat, gamma: float) -> np.ndarray:
    if not gamma > 0:
        raise InvalidParameterError("gamma must be positive")
    return np.asarray(beta_hat, dtype=float) / gamma


def turning_points(beta_hat, window: int = 10) -> List[Tuple[int, str]]:
    """Indices below (min) or above (max) every one of the next ``window`` values.

    The last ``window`` indices are never flagged. Indices are 0-based.
    """
    if window < 1:
        raise InvalidParameterError("window must be >= 1")
    b = np.asarray(beta_hat, dtype=float)
    out = []
    for t in range(len(b) - window):
        ahead = b[t + 1 : t + 1 + window]
        if np.all(b[t] < ahead):
            out.append((t, "min"))
        elif np.all(b[t] > ahead):
            out.append((t, "max"))
    return out


def policy_trigger(r_series, threshold: float = 1.2) -> Optional[int]:
    """0-based index of the first value above ``threshold``, or None."""
    hits = np.flatnonzero(np.asarray(r_series, dtype=float) > threshold)
    return int(hits[0]) if hits.size else None


# --------------------------------------------------------------------------
# real-time monitoring


@dataclass
class MonitorTrace:
    """Real-time and full-sample log contact rates at t - lag for t = r..n.

    ``t_index`` holds the 0-based observation index t - lag each entry refers to.
    """

    t_index: np.ndarray
    dates: List[dt.date]
    beta_realtime: np.ndarray
    beta_fullsample: np.ndarray
    benchmark: np.ndarray
    theta_path: List[ThetaParams]
    failure: Optional[str] = None


def benchmark_average(logY, t: int, lag: int = 3) -> float:
    """Rolling mean of the seven observations ending at 0-based index ``t``.

    Centred on t - 3, three of the averaged days lie after the reported date.
    """
    logY = np.asarray(logY, dtype=float)
    if t < 6:
        raise InvalidParameterError("benchmark needs seven observations")
    return float(np.mean(logY[t - 6 : t + 1]))


def _estimate_window(logY, weekday_of_start, config, bandwidth_exp, lag):
    n = len(logY)
    d_ew = elw_estimate(logY, elw_bandwidth(n, bandwidth_exp), config.d_max)
    mu, alpha = deterministic_fit(logY, d_ew, weekday_of_start)
    y_adj = adjust(logY, mu, alpha, weekday_of_start)
    rep = css_fit(y_adj, config)
    x = run_smoother(rep.theta_hat, y_adj).x_smooth
    return rep.theta_hat, mu + x[n - 1 - lag], mu + x


def monitor_recursive(logY, weekday_of_start: int, r: int,
                      config: EstimationConfig = EstimationConfig(),
                      lag: int = 3, refresh_every: int = 30, bandwidth_exp: float = 0.65,
                      start_date: Optional[dt.date] = None) -> MonitorTrace:
    """Re-estimate on data 1..t for t = r..n and record log beta_{t-lag|t}.

    The first window uses the full multistart; later windows start a single
    run from the previous estimate, with a fresh multistart every
    ``refresh_every`` steps. The full-sample column comes from the fit on all
    n observations.
    """
    logY = as_series(logY, "logY")
    n = len(logY)
    if not 7 <= r <= n:
        raise InvalidParameterError(f"r must be in 7..{n}")
    if start_date is None:
        start_date = dt.date(2020, 1, 6) + dt.timedelta(days=int(weekday_of_start))

    _, _, full_path = _estimate_window(logY, weekday_of_start, config, bandwidth_exp, lag)

    idx, realtime, bench, thetas = [], [], [], []
    failure = None
    prev = None
    for t in range(r, n + 1):
        cold = prev is None or (t - r) % refresh_every == 0
        cfg = config if cold else replace(config, start=prev)
        try:
            theta, est, _ = _estimate_window(logY[:t], weekday_of_start, cfg, bandwidth_exp, lag)
        except (FracUCError, ArithmeticError, ValueError) as exc:
            failure = f"estimation failed at t={t}: {exc}"
            break
        prev = theta
        idx.append(t - 1 - lag)
        realtime.append(est)
        bench.append(benchmark_average(logY, t - 1, lag))
        thetas.append(theta)
    idx = np.asarray(idx, dtype=int)
    return MonitorTrace(idx, [start_date + dt.timedelta(days=int(i)) for i in idx],
                        np.asarray(realtime), full_path[idx], np.asarray(bench), thetas, failure)


# --------------------------------------------------------------------------
# full pipeline


@dataclass
class SirResult:
    measurement: Measurement
    fit: FitReport
    log_beta: np.ndarray
    gamma: float
    r_hat: np.ndarray
    turning: List[Tuple[int, str]]
    trigger: Optional[int]
    v: np.ndarray

    @property
    def dates(self) -> List[dt.date]:
        return self.measurement.dates


def sir_pipeline(cases: CaseSeries, config: EstimationConfig = EstimationConfig(),
                 window: int = 10, threshold: float = 1.2,
                 bandwidth_exp: float = 0.65) -> SirResult:
    """Measurement, two-step fit, smoothing, gamma, reproduction rate and flags."""
    meas = build_measurement(cases)
    fit, y_adj = fit_uc(meas.log_y, meas.weekday_of_start, config, bandwidth_exp)
    log_beta = fit.mu_hat + run_smoother(fit.theta_hat, y_adj).x_smooth
    beta = np.exp(log_beta)
    aligned = cases.slice(meas.offset, meas.offset + len(beta))
    gamma = gamma_hat(beta, aligned)
    r_hat = reproduction_rate(beta, gamma)
    v = run_filter(fit.theta_hat, y_adj).v
    return SirResult(meas, fit, log_beta, gamma, r_hat, turning_points(beta, window),
                     policy_trigger(r_hat, threshold), v)
