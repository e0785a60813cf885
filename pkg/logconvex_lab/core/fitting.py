"""Fit (c, K, beta) of the one-time observation estimate to measured runs.

The model is LHS <= (c exp(K/T) OBS)^beta TOTAL^{1-beta}. For fixed
(K, beta) the smallest admissible ln c is

    max_i [(ln LHS_i - (1 - beta) ln TOTAL_i)/beta - K/T_i - ln OBS_i],

which makes the largest log-violation exactly zero. Coordinate descent over
K and beta then minimizes the mean log-slack, i.e. the fitted bound hugs
the data as closely as the model allows.
"""

import logging
import math
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import minimize_scalar

from logconvex_lab.core.errors import InvalidInputError
from logconvex_lab.core.models import FitResult, ObservationReport

logger = logging.getLogger(__name__)

BETA_BOUNDS = (1.0 / 3.0, 0.95)
MIN_REPORTS = 10
MIN_TIMES = 3


def _logs(reports: Sequence[ObservationReport]) -> Tuple[np.ndarray, ...]:
    with np.errstate(divide="ignore"):
        T = np.array([r.T for r in reports], dtype=float)
        lhs = np.log(np.array([r.lhs for r in reports], dtype=float))
        obs = np.log(np.array([r.observed for r in reports], dtype=float))
        total = np.log(np.array([r.total for r in reports], dtype=float))
    return T, lhs, obs, total


def optimal_log_c(K: float, beta: float, T: np.ndarray, lhs: np.ndarray, obs: np.ndarray, total: np.ndarray) -> float:
    """Smallest ln c for which every report satisfies the model."""
    with np.errstate(invalid="ignore"):
        candidates = (lhs - (1 - beta) * total) / beta - K / T - obs
    candidates = candidates[~np.isnan(candidates)]
    return float(np.max(candidates)) if candidates.size else -math.inf


def residuals(
    log_c: float, K: float, beta: float, T: np.ndarray, lhs: np.ndarray, obs: np.ndarray, total: np.ndarray
) -> np.ndarray:
    """rhs - lhs of the model in log space, one entry per report."""
    return beta * (log_c + K / T + obs) + (1 - beta) * total - lhs


def _mean_slack(K: float, beta: float, data) -> float:
    log_c = optimal_log_c(K, beta, *data)
    if not math.isfinite(log_c):
        return math.inf
    r = residuals(log_c, K, beta, *data)
    r = r[np.isfinite(r)]
    return float(np.mean(r)) if r.size else math.inf


def empirical_fit(
    reports: Sequence[ObservationReport],
    K0: Optional[float] = None,
    r: Optional[float] = None,
    max_sweeps: int = 50,
    tolerance: float = 1e-12,
) -> FitResult:
    """Fit (c, K, beta) to one-time observation reports.

    Args:
        reports: At least 10 reports spanning at least 3 values of T.
        K0: Initial K; defaults to r²/8 when r is given, else 1.
        r: Observation radius used for the default K0.
        max_sweeps: Coordinate-descent sweep limit.
        tolerance: Stop once a sweep improves the mean slack by less.

    Returns:
        FitResult. If no finite c fits (for example an observation of zero
        with a nonzero LHS) feasible is False and c is infinite; that is
        reported, not raised.

    Raises:
        InvalidInputError: Too few reports or distinct times.
    """
    if len(reports) < MIN_REPORTS:
        raise InvalidInputError(f"need at least {MIN_REPORTS} reports, got {len(reports)}")
    if len({r_.T for r_ in reports}) < MIN_TIMES:
        raise InvalidInputError(f"reports must span at least {MIN_TIMES} values of T")
    data = _logs(reports)
    K = K0 if K0 is not None else (r * r / 8 if r is not None else 1.0)
    beta = 0.5
    K_upper = max(10.0 * K, 10.0)

    best = _mean_slack(K, beta, data)
    sweeps = 0
    if math.isfinite(best):
        for sweeps in range(1, max_sweeps + 1):
            previous = best
            result = minimize_scalar(
                lambda k: _mean_slack(k, beta, data), bounds=(0.0, K_upper), method="bounded"
            )
            if result.fun <= best:
                K, best = float(result.x), float(result.fun)
            result = minimize_scalar(
                lambda b: _mean_slack(K, b, data), bounds=BETA_BOUNDS, method="bounded"
            )
            if result.fun <= best:
                beta, best = float(result.x), float(result.fun)
            if previous - best < tolerance:
                break

    log_c = optimal_log_c(K, beta, *data)
    feasible = math.isfinite(log_c)
    if feasible:
        res: List[float] = residuals(log_c, K, beta, *data).tolist()
        finite = [v for v in res if math.isfinite(v)]
        max_violation = max(0.0, -min(finite)) if finite else 0.0
        mean_slack = float(np.mean(finite)) if finite else 0.0
    else:
        logger.warning("empirical fit is infeasible: no finite c satisfies every report")
        res = [math.nan] * len(reports)
        max_violation = math.inf
        mean_slack = math.inf
    return FitResult(
        c=math.exp(log_c) if feasible and log_c < 700 else math.inf,
        K=K,
        beta=beta,
        log_c=log_c,
        max_violation=max_violation,
        mean_slack=mean_slack,
        residuals=res,
        feasible=feasible,
        sweeps=sweeps,
    )
