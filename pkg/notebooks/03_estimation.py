# %% [markdown]
# # Estimation
#
# The fractional order and the signal-to-noise ratio are estimated by
# minimizing the mean squared prediction error. A semiparametric local
# Whittle estimate gives a first-stage order used to remove an intercept
# and weekday effects.

# %%
import numpy as np

from fracuc import EstimationConfig, ThetaParams, css_fit, elw_estimate, fit_uc
from fracuc.estimate import elw_bandwidth, weekday_dummies
from fracuc.mc import simulate_dgp

n = 250
y, x = simulate_dgp(ThetaParams(1.2, 0.05, 0.2), n, seed=3)
alpha = np.array([0.2, 0.1, 0.0, -0.05, -0.1, -0.25, 0.1])
alpha -= alpha.mean()
log_y = -2.0 + y + weekday_dummies(n, 0) @ alpha

# %%
print("local Whittle d:", round(elw_estimate(log_y, elw_bandwidth(n)), 3))

# %%
report, y_adj = fit_uc(log_y, weekday_of_start=0, config=EstimationConfig(n_starts=20))
for name, est, se in report.table():
    print(f"{name:>10s} {est:9.4f} ({se:.4f})")
print("intercept", round(report.mu_hat, 3))
print("weekday effects", np.round(report.alpha_hat, 3))

# %% [markdown]
# CSS on data that is already adjusted, from a single fixed start.

# %%
rep = css_fit(y, EstimationConfig(start=ThetaParams(1.0, 1.0, 1.0)))
print("d from the fixed start:", round(rep.theta_hat.d, 3), "converged:", rep.converged)
