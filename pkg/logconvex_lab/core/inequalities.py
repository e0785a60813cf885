"""Functional inequalities and observation estimates checked on samples.

Hardy and Nash inequalities are evaluated on a single discretized field.
The observation, observability and spectral estimates are evaluated on
seeded heat states in log space, with constants taken from a ConstantChain.
"""

import logging
import math
from typing import List, Optional, Sequence

import numpy as np
from scipy import integrate

from logconvex_lab.core import stencils
from logconvex_lab.core.domain import eigenfunction_values, inverse_square_weights, region_weights
from logconvex_lab.core.errors import InvalidInputError, UnsupportedError
from logconvex_lab.core.heat import compute_norm, evolve
from logconvex_lab.core.models import (
    ConstantChain,
    EigenSystem,
    Field,
    Grid,
    InequalityReport,
    ObservationReport,
    Region,
    SpectralState,
)

logger = logging.getLogger(__name__)

FUNCTIONAL_KINDS = ("hardy", "nash")


def check_functional_inequality(
    kind: str,
    field: Field,
    n: int,
    mu: Optional[float] = None,
    tolerance: float = 1e-10,
) -> InequalityReport:
    """Evaluate Hardy or Nash on a sampled field.

    hardy: mu ∫ v²/rho² <= ∫ |∇v|² on a radial grid; mu defaults to
        (n - 2)²/4. Values of mu above that are evaluated as well, they
        just have no reason to pass.
    nash: ||v||_2 <= (e ||v||_1)^{2/(2+n)} ((1/(2 sqrt(pi))) ||∇v||_2)^{n/(2+n)}.

    Raises:
        InvalidInputError: For hardy on a Cartesian grid or an unknown kind.
    """
    grid = field.grid
    v = field.values
    grads = stencils.gradient(v, grid)
    grad_sq = float(np.sum(sum(g * g for g in grads) * grid.weights))
    if kind == "hardy":
        if not grid.is_radial:
            raise InvalidInputError("hardy needs a radial grid")
        if n != grid.n:
            raise InvalidInputError(f"dimension {n} does not match the grid (n={grid.n})")
        mu = (n - 2) ** 2 / 4 if mu is None else float(mu)
        lhs = mu * float(np.sum(v ** 2 * inverse_square_weights(grid)))
        rhs = grad_sq
        context = {"mu": mu, "n": n, "critical_mu": (n - 2) ** 2 / 4}
    elif kind == "nash":
        l2 = math.sqrt(float(np.sum(v ** 2 * grid.weights)))
        l1 = float(np.sum(np.abs(v) * grid.weights))
        lhs = l2
        rhs = (math.e * l1) ** (2 / (2 + n)) * (math.sqrt(grad_sq) / (2 * math.sqrt(math.pi))) ** (n / (2 + n))
        context = {"n": n, "l1": l1, "l2": l2, "h1": math.sqrt(grad_sq)}
    else:
        raise InvalidInputError(f"unknown inequality {kind!r}; expected one of {FUNCTIONAL_KINDS}")
    return InequalityReport.from_sides(kind, [lhs], [rhs], tolerance, context=context)


# ---------------------------------------------------------------------------
# Observation estimates
# ---------------------------------------------------------------------------

def _safe_log(value: float) -> float:
    return math.log(value) if value > 0 else -math.inf


def measure_observation(state: SpectralState, T: float, region: Region = "omega") -> ObservationReport:
    """||u(T)||, ||u(T)||_omega and ||u0|| for one state."""
    if T <= 0:
        raise InvalidInputError("T must be positive")
    final = evolve(state, state.t + T)
    return ObservationReport(
        T=T,
        lhs=compute_norm(final, "l2"),
        observed=compute_norm(final, "lp_masked", p=2, region=region),
        total=compute_norm(state, "l2"),
    )


def check_one_time_observation(
    reports: Sequence[ObservationReport],
    chain: ConstantChain,
    tolerance: float = 1e-10,
) -> InequalityReport:
    """||u(T)|| <= (c exp(K/T) ||u(T)||_omega)^beta ||u0||^{1-beta} in log space.

    c, K and beta are read from the chain.
    """
    if not reports:
        raise InvalidInputError("no observation reports")
    log_c, K, beta = chain.log("c"), chain.value("K"), chain.value("beta")
    lhs, rhs = [], []
    for r in reports:
        lhs.append(_safe_log(r.lhs))
        rhs.append(beta * (log_c + K / r.T + _safe_log(r.observed)) + (1 - beta) * _safe_log(r.total))
    slack = [(b - a) / max(1.0, abs(a)) for a, b in zip(lhs, rhs)]
    return InequalityReport.from_sides(
        "one_time_observation",
        lhs,
        rhs,
        tolerance,
        context={"c": math.exp(log_c), "K": K, "beta": beta, "T": [r.T for r in reports]},
        log_scale=True,
        slack=slack,
    )


def observed_integral(state: SpectralState, T: float, region: Region = "omega") -> float:
    """∫_0^T ||u(t)||_omega dt by adaptive quadrature."""
    def integrand(t: float) -> float:
        return compute_norm(evolve(state, state.t + t), "lp_masked", p=2, region=region)

    value, error = integrate.quad(integrand, 0.0, T, limit=200)
    logger.debug(f"observed integral {value:.6e} (quad error {error:.1e})")
    return value


def check_integrated_observability(
    states: Sequence[SpectralState],
    T: float,
    chain: ConstantChain,
    region: Region = "omega",
    tolerance: float = 1e-10,
) -> InequalityReport:
    """||u(T)|| <= constant ∫_0^T ||u(t)||_omega dt, with constant = chain["constant"]."""
    if not states:
        raise InvalidInputError("no states")
    log_constant = chain.log("constant")
    lhs, rhs = [], []
    for state in states:
        lhs.append(_safe_log(compute_norm(evolve(state, state.t + T), "l2")))
        rhs.append(log_constant + _safe_log(observed_integral(state, T, region)))
    slack = [(b - a) / max(1.0, abs(a)) for a, b in zip(lhs, rhs)]
    return InequalityReport.from_sides(
        "integrated_observability",
        lhs,
        rhs,
        tolerance,
        context={"T": T, "log_constant": log_constant, "samples": len(states)},
        log_scale=True,
        slack=slack,
    )


def check_spectral_inequality(
    system: EigenSystem,
    draws: Sequence[np.ndarray],
    lam: float,
    log_constant: float,
    region: Region = "omega",
    grid: Optional[Grid] = None,
    tolerance: float = 1e-10,
) -> InequalityReport:
    """sum_{lambda_j <= lam} |a_j|² <= exp(log_constant) ∫_omega |sum a_j e_j|².

    Args:
        system: Eigen-system whose low modes are summed.
        draws: Coefficient vectors; entries beyond the cut are ignored.
        lam: Frequency cut.
        log_constant: Natural log of the spectral constant.
        region: Observation region.
        grid: Quadrature grid (defaults to the system's grid).

    Raises:
        InvalidInputError: If no eigenvalue lies below lam.
        UnsupportedError: If the system has no grid to integrate on.
    """
    keep = system.eigenvalues <= lam * (1 + 1e-12)
    count = int(np.count_nonzero(keep))
    if count == 0:
        raise InvalidInputError(f"no eigenvalue below lambda={lam}")
    grid = grid if grid is not None else system.grid
    if grid is None:
        raise UnsupportedError("spectral check needs a quadrature grid")
    modes = eigenfunction_values(system, grid)[keep]
    weights = region_weights(grid, region)
    lhs: List[float] = []
    rhs: List[float] = []
    for draw in draws:
        a = np.asarray(draw, dtype=float)[:system.count][keep]
        values = np.tensordot(a, modes, axes=(0, 0))
        lhs.append(_safe_log(float(np.sum(a ** 2))))
        rhs.append(log_constant + _safe_log(float(np.sum(values ** 2 * weights))))
    slack = [(b - a) / max(1.0, abs(a)) for a, b in zip(lhs, rhs)]
    return InequalityReport.from_sides(
        "spectral_inequality",
        lhs,
        rhs,
        tolerance,
        context={"lambda": lam, "modes": count, "log_constant": log_constant},
        log_scale=True,
        slack=slack,
    )
