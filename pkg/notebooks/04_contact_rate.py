# %% [markdown]
# # Contact rates from case counts
#
# Cumulative confirmed, recovered and deceased counts determine the daily
# contact rate of a discrete SIR model up to measurement noise. The
# pipeline smooths its logarithm, estimates the recovery rate and flags
# turning points and a policy threshold.

# %%
import datetime as dt

import numpy as np

from fracuc import EstimationConfig
from fracuc.sir import CaseSeries, build_measurement, sir_pipeline, simulate_sir, zero_delta_adjust

n = 200
t = np.arange(n)
log_beta = np.log(0.03) + 0.6 * np.sin(2 * np.pi * t / 160)
rng = np.random.default_rng(5)
noisy = np.exp(log_beta + rng.standard_normal(n) * 0.3)
cases = simulate_sir(noisy, 0.09, 0.01, i0=2e5, population=8e7, start=dt.date(2020, 3, 2),
                     c0=2e5)

# %%
res = sir_pipeline(cases, EstimationConfig(n_starts=20))
planted = log_beta[res.measurement.offset - 1:][: len(res.log_beta)]
print("gamma estimate:", round(res.gamma, 4), "(planted 0.1)")
print("correlation with planted log contact rate:",
      round(float(np.corrcoef(res.log_beta, planted)[0, 1]), 3))
print("turning points:", [(res.dates[i].isoformat(), k) for i, k in res.turning][:6])
print("first date above R = 1.2:", None if res.trigger is None else res.dates[res.trigger])

# %% [markdown]
# A reported day without new cases breaks the log measurement. The repair
# spreads the neighbouring increments over the three days.

# %%
c = np.cumsum([100.0, 5, 6, 0, 3, 4])
raw = CaseSeries([dt.date(2020, 4, 1) + dt.timedelta(days=k) for k in range(6)], c,
                 np.zeros(6), np.zeros(6), 1e6)
print("increments before:", np.diff(c), "after:", np.diff(zero_delta_adjust(raw, 3).confirmed))
print("usable after repair:", len(build_measurement(zero_delta_adjust(raw, 3)).log_y), "days")
