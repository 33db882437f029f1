"""Fractional unobserved-components models: filter, smoother, CSS estimation,
contact-rate measurement and a fractional Beveridge-Nelson decomposition."""
from .errors import *  # noqa: F401,F403
from .fracops import (BnDecomposition, FracCoeffs, LagPolynomial, aggregate_theta_u,
                      bn_decompose, fracdiff, fracint, impulse_response, lagpoly_apply,
                      lagpoly_invert, lagpoly_solve, pi_coeffs, reduced_form_innovations,
                      stability_check)
from .gausscov import (ThetaParams, cov_xy, cov_yy, direct_solve_oracle,
                       innovations_predict)
from .filter import FilterOutput, SmoothOutput, run_filter, run_smoother, smoother_r2
from .estimate import (EstimationConfig, FitReport, adjust, css_fit, deterministic_fit,
                       elw_estimate, fit_uc, hessian_se, seasonal_means_alt)

__version__ = "0.1.0"
