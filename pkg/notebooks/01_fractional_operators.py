# %% [markdown]
# # Fractional operators
#
# Type II fractional differencing starts every process at zero, so the
# operators are finite convolutions. This script walks through the
# coefficients, the shock persistence they imply and the lag operator
# `L_d = 1 - Delta^d` used for cyclical dynamics.

# %%
import numpy as np

from fracuc import fracdiff, fracint, impulse_response, pi_coeffs
from fracuc.fracops import LagPolynomial, lagpoly_apply, lagpoly_solve, stability_check

print("pi_j(0.4), j = 0..5:", np.round(pi_coeffs(0.4, 5).coeffs, 4))

# %% [markdown]
# A growth rate that is I(0.2166) keeps about a fifth of a shock one day
# later and still about 2% three weeks later.

# %%
w = impulse_response(0.2166, 21)
for h in (1, 2, 3, 7, 14, 21):
    print(f"horizon {h:2d}: {w[h]:.5f}")

# %% [markdown]
# Differencing and integrating of the same order undo each other exactly
# under the truncation convention.

# %%
rng = np.random.default_rng(0)
e = rng.standard_normal(200)
x = fracint(e, 1.3)
print("max |fracdiff(fracint(e)) - e| =", np.max(np.abs(fracdiff(x, 1.3) - e)))

# %% [markdown]
# An AR polynomial in `L_d` is admissible when it has no zero on the image
# of the unit disk under `z -> 1 - (1 - z)^d`. At `d = 1` that is the
# classical unit-root condition.

# %%
for coeffs in [(0.5,), (1.2,), (1.1, -0.3)]:
    phi = LagPolynomial(coeffs)
    print(coeffs, {d: stability_check(phi, d) for d in (0.6, 1.0, 1.6)})

phi = LagPolynomial((0.5, -0.2))
z = lagpoly_apply(phi, 1.3, e)
print("solve undoes apply:", np.allclose(lagpoly_solve(phi, 1.3, z), e))
