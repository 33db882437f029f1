"""Monte Carlo study of the CSS and exact local Whittle estimators.

Each replication simulates y_t = x_t + u_t with Delta_+^{d0} x_t = eta_t,
fits the CSS estimator from the fixed start (1, 1, 1), smooths x_t and runs
the ELW estimator at each bandwidth exponent.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .errors import FracUCError
from .estimate import EstimationConfig, css_fit, elw_bandwidth, elw_estimate
from .filter import run_smoother, smoother_r2
from .fracops import fracint
from .gausscov import ThetaParams

BANDWIDTH_EXPONENTS = (0.45, 0.50, 0.55, 0.60, 0.65, 0.70)
MAX_FAILURE_SHARE = 0.02


@dataclass(frozen=True)
class McDesign:
    d0_values: Tuple[float, ...] = (0.75, 1.25, 1.75)
    rho_values: Tuple[float, ...] = (0.5, 1.0, 2.0)
    n_values: Tuple[int, ...] = (100, 200, 300)
    sigma_u2: float = 1.0
    replications: int = 1000
    seed: int = 0
    bandwidth_exponents: Tuple[float, ...] = BANDWIDTH_EXPONENTS

    def __post_init__(self):
        if not (self.d0_values and self.rho_values and self.n_values):
            raise ValueError("design grids must be nonempty")
        if self.replications < 1:
            raise ValueError("replications must be >= 1")

    def cells(self) -> List[Tuple[int, float, float]]:
        """(n, rho, d0) in the row order of the published table."""
        return list(itertools.product(self.n_values, self.rho_values, self.d0_values))


@dataclass
class McResultRow:
    n: int
    rho: float
    d0: float
    mse_d_css: float
    mse_d_elw: Dict[float, float]
    mse_x: float
    r2_x: float
    replications: int
    failures: int = 0
    failed: bool = False


def rep_seed(base_seed: int, n: int, rho: float, d0: float, rep: int) -> np.random.SeedSequence:
    """Counter-based seed for one replication, independent of execution order."""
    return np.random.SeedSequence([base_seed, n, int(round(rho * 1000)),
                                   int(round(d0 * 1000)), rep])


def simulate_dgp(theta0: ThetaParams, n: int, seed) -> Tuple[np.ndarray, np.ndarray]:
    """Draw (y, x) with Gaussian eta and u; ``seed`` is anything numpy accepts."""
    rng = np.random.default_rng(seed)
    eta = rng.standard_normal(n) * math.sqrt(theta0.sigma_eta2)
    u = rng.standard_normal(n) * math.sqrt(theta0.sigma_u2)
    x = fracint(eta, theta0.d)
    return x + u, x


def run_replication(theta0: ThetaParams, n: int, seed,
                    exponents: Sequence[float] = BANDWIDTH_EXPONENTS) -> dict:
    y, x = simulate_dgp(theta0, n, seed)
    cfg = EstimationConfig(start=ThetaParams(1.0, 1.0, 1.0))
    fit = css_fit(y, cfg)
    x_hat = run_smoother(fit.theta_hat, y).x_smooth
    mse_x, r2_x = smoother_r2(x, x_hat)
    elw = {e: elw_estimate(y, elw_bandwidth(n, e)) for e in exponents}
    return dict(err_css=fit.theta_hat.d - theta0.d,
                err_elw={e: v - theta0.d for e, v in elw.items()},
                mse_x=mse_x, r2_x=r2_x)


def _pairwise_mean(values) -> float:
    # numpy's sum uses pairwise summation
    return float(np.sum(np.asarray(values, dtype=float)) / len(values))


def run_cell(n: int, rho: float, d0: float, design: McDesign) -> McResultRow:
    theta0 = ThetaParams(d0, rho * design.sigma_u2, design.sigma_u2)
    reps, failures = [], 0
    for k in range(design.replications):
        try:
            reps.append(run_replication(theta0, n, rep_seed(design.seed, n, rho, d0, k),
                                        design.bandwidth_exponents))
        except (FracUCError, ArithmeticError, ValueError):
            failures += 1
    failed = failures > MAX_FAILURE_SHARE * design.replications or not reps
    nan = float("nan")
    if not reps:
        return McResultRow(n, rho, d0, nan, {e: nan for e in design.bandwidth_exponents},
                           nan, nan, 0, failures, True)
    return McResultRow(
        n, rho, d0,
        mse_d_css=_pairwise_mean([r["err_css"] ** 2 for r in reps]),
        mse_d_elw={e: _pairwise_mean([r["err_elw"][e] ** 2 for r in reps])
                   for e in design.bandwidth_exponents},
        mse_x=_pairwise_mean([r["mse_x"] for r in reps]),
        r2_x=_pairwise_mean([r["r2_x"] for r in reps]),
        replications=len(reps), failures=failures, failed=failed)


def run_study(design: McDesign, cells: Optional[Iterable[Tuple[int, float, float]]] = None
              ) -> List[McResultRow]:
    """Run every (n, rho, d0) cell of ``design`` (or the given subset)."""
    cells = design.cells() if cells is None else list(cells)
    return [run_cell(n, rho, d0, design) for n, rho, d0 in cells]


def table_header(exponents: Sequence[float] = BANDWIDTH_EXPONENTS) -> List[str]:
    return (["n", "rho", "d0", "mse_d_css"]
            + [f"mse_d_elw_{e:.2f}" for e in exponents]
            + ["mse_x", "r2_x", "replications", "failures", "failed"])


def table_rows(rows: Sequence[McResultRow]) -> List[list]:
    out = []
    for r in rows:
        out.append([r.n, r.rho, r.d0, r.mse_d_css]
                   + [r.mse_d_elw[e] for e in sorted(r.mse_d_elw)]
                   + [r.mse_x, r.r2_x, r.replications, r.failures, int(r.failed)])
    return out
