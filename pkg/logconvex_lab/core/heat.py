"""Heat semigroup in eigen-coefficients.

A state is a coefficient vector over an EigenSystem; evolving multiplies
each coefficient by exp(-lambda_j dt). Norms are exact in coefficient space
and use grid quadrature only for masked L^p norms.
"""

import logging
import math
from typing import Optional, Sequence

import numpy as np

from logconvex_lab.core.domain import region_weights, synthesize
from logconvex_lab.core.errors import (
    InvalidInputError,
    UndefinedRatioError,
    UnsupportedError,
)
from logconvex_lab.core.models import (
    EigenSystem,
    EvolutionTrace,
    Field,
    Grid,
    InequalityReport,
    Region,
    SpectralState,
)
from logconvex_lab.core.utils import smooth_coefficients

logger = logging.getLogger(__name__)

NORM_KINDS = ("l2", "form", "lp_masked")


def random_state(system: EigenSystem, rng: np.random.Generator, decay: float = 1.0) -> SpectralState:
    """Seeded initial state with coefficients N(0, 1) / j**decay."""
    return SpectralState(coefficients=smooth_coefficients(rng, system.count, decay), system=system)


def evolve(state: SpectralState, t: float) -> SpectralState:
    """Advance a state to time t.

    Args:
        state: Current state.
        t: Target time, not earlier than state.t.

    Returns:
        New state with coefficients scaled by exp(-lambda_j (t - state.t)).

    Raises:
        InvalidInputError: If t < state.t.
    """
    if t < state.t:
        raise InvalidInputError(f"backward evolution from t={state.t} to t={t} is not supported")
    if t == state.t:
        return SpectralState(coefficients=state.coefficients.copy(), system=state.system, t=t)
    decay = np.exp(-state.system.eigenvalues * (t - state.t))
    return SpectralState(coefficients=state.coefficients * decay, system=state.system, t=t)


def sample(state: SpectralState, grid: Optional[Grid] = None) -> Field:
    """Grid samples of a state."""
    grid = grid if grid is not None else state.system.grid
    if grid is None:
        raise InvalidInputError("no grid available for sampling")
    return Field(values=synthesize(state.system, state.coefficients, grid), grid=grid)


def compute_norm(
    state: SpectralState,
    kind: str = "l2",
    p: int = 2,
    region: Region = "omega",
    grid: Optional[Grid] = None,
) -> float:
    """Norms of a state.

    Args:
        state: The state.
        kind: "l2" (coefficient norm), "form" (sum lambda_j a_j², the
            Dirichlet or Schrödinger quadratic form) or "lp_masked".
        p: Exponent for lp_masked, 1 or 2.
        region: Region for lp_masked.
        grid: Grid for lp_masked (defaults to the eigen-system's grid).

    Returns:
        The requested value; "form" is not square-rooted.

    Raises:
        UnsupportedError: For p outside {1, 2}.
        InvalidInputError: For an unknown kind.
    """
    if kind == "l2":
        return float(np.sqrt(np.sum(state.coefficients ** 2)))
    if kind == "form":
        return float(np.sum(state.system.eigenvalues * state.coefficients ** 2))
    if kind != "lp_masked":
        raise InvalidInputError(f"unknown norm kind: {kind!r}")
    if p not in (1, 2):
        raise UnsupportedError(f"only p in {{1, 2}} is supported, got p={p}")
    if state.is_zero:
        return 0.0
    field = sample(state, grid)
    weights = region_weights(field.grid, region)
    total = float(np.sum(np.abs(field.values) ** p * weights))
    return total ** (1.0 / p)


def default_region(grid: Optional[Grid]) -> Region:
    """"omega" when the grid carries an observation region, else "all"."""
    if grid is not None and grid.omega_weights is not None:
        return "omega"
    return "all"


def evolution_trace(state: SpectralState, times: Sequence[float], region: Optional[Region] = None) -> EvolutionTrace:
    """Sample l2, form and masked L¹/L² norms at increasing times.

    Raises:
        InvalidInputError: If times are not strictly increasing or start
            before the state's time.
    """
    times = [float(t) for t in times]
    if any(b <= a for a, b in zip(times, times[1:])):
        raise InvalidInputError("trace times must be strictly increasing")
    if region is None:
        region = default_region(state.system.grid)
    trace = EvolutionTrace()
    current = state
    for t in times:
        current = evolve(current, t)
        trace.times.append(t)
        trace.l2.append(compute_norm(current, "l2"))
        trace.form.append(compute_norm(current, "form"))
        trace.l2_omega.append(compute_norm(current, "lp_masked", p=2, region=region))
        trace.l1_omega.append(compute_norm(current, "lp_masked", p=1, region=region))
    return trace


def check_log_convexity(
    u0: SpectralState, T: float, sample_count: int = 50, tolerance: float = 1e-12
) -> InequalityReport:
    """Check ||u(t)|| <= ||u(T)||^{t/T} ||u0||^{1 - t/T} on [0, T].

    Both sides are divided by ||u0|| so the tolerance is scale-free.
    """
    if T <= 0:
        raise InvalidInputError("T must be positive")
    if sample_count < 2:
        raise InvalidInputError("need at least 2 samples")
    norm0 = compute_norm(u0, "l2")
    if norm0 == 0:
        raise InvalidInputError("log-convexity needs a nonzero initial state")
    normT = compute_norm(evolve(u0, u0.t + T), "l2") / norm0
    lhs = []
    rhs = []
    times = np.linspace(0.0, T, sample_count)
    for t in times:
        lhs.append(compute_norm(evolve(u0, u0.t + t), "l2") / norm0)
        rhs.append(normT ** (t / T))
    return InequalityReport.from_sides(
        "log_convexity",
        lhs,
        rhs,
        tolerance,
        context={"T": T, "samples": sample_count, "times": times.tolist(), "normalized_by": "||u0||"},
    )


def check_regularizing(u0: SpectralState, t: float) -> float:
    """Empirical constant t * form(u(t)) / ||u0||².

    Raises:
        InvalidInputError: If t <= 0.
        UndefinedRatioError: If u0 is zero.
    """
    if t <= 0:
        raise InvalidInputError("t must be positive")
    norm_sq = float(np.sum(u0.coefficients ** 2))
    if norm_sq == 0:
        raise UndefinedRatioError("regularizing ratio is undefined for a zero state")
    return t * compute_norm(evolve(u0, u0.t + t), "form") / norm_sq


def _gaussian_factor(grid: Grid, x0: Optional[Sequence[float]], upsilon: float) -> np.ndarray:
    if x0 is None:
        return np.ones(grid.shape)
    r = grid.distance_from(x0)
    return np.exp(-r ** 2 / (2.0 * upsilon))


def weighted_energy_monotone(
    u0: SpectralState,
    x0: Optional[Sequence[float]],
    T: float,
    epsilon: float,
    sample_count: int = 21,
    tolerance: float = 1e-8,
    grid: Optional[Grid] = None,
) -> InequalityReport:
    """Check that t -> ∫|u|² exp(-|x - x0|²/(2(T - t + epsilon))) is nonincreasing.

    Consecutive samples are compared after dividing by the value at t = 0,
    so the slack of step k is (E_k - E_{k+1}) / E_0.

    Args:
        u0: Initial state (any basis, including radial Schrödinger).
        x0: Weight anchor; None gives the unweighted energy. Radial grids
            measure distance from the origin.
        T: Final time.
        epsilon: Positive regularization of the weight.
        sample_count: Number of sample times in [0, T].
        tolerance: Allowed relative increase per step.
        grid: Quadrature grid (defaults to the eigen-system's grid).

    Raises:
        InvalidInputError: On epsilon <= 0, T <= 0 or a zero state.
    """
    if epsilon <= 0:
        raise InvalidInputError("epsilon must be positive")
    if T <= 0:
        raise InvalidInputError("T must be positive")
    if u0.is_zero:
        raise InvalidInputError("weighted energy of a zero state is identically zero")

    energies = []
    times = np.linspace(0.0, T, sample_count)
    current = u0
    for t in times:
        current = evolve(current, u0.t + t)
        field = sample(current, grid)
        weight = _gaussian_factor(field.grid, x0, T - t + epsilon)
        energies.append(float(np.sum(field.values ** 2 * weight * field.grid.weights)))

    scale = energies[0]
    lhs = [e / scale for e in energies[1:]]
    rhs = [e / scale for e in energies[:-1]]
    logger.debug(f"weighted energy: {energies[0]:.6e} -> {energies[-1]:.6e}")
    return InequalityReport.from_sides(
        "weighted_energy_monotone",
        lhs,
        rhs,
        tolerance,
        context={
            "T": T,
            "epsilon": epsilon,
            "x0": None if x0 is None else list(x0),
            "mu": u0.system.mu,
            "times": times.tolist(),
            "energies": energies,
        },
    )


def single_mode(system: EigenSystem, j: int = 1, amplitude: float = 1.0) -> SpectralState:
    """State amplitude * e_j (1-based index)."""
    if not 1 <= j <= system.count:
        raise InvalidInputError(f"mode {j} outside 1..{system.count}")
    coefficients = np.zeros(system.count)
    coefficients[j - 1] = amplitude
    return SpectralState(coefficients=coefficients, system=system)


def regularizing_bound() -> float:
    """sup_x x exp(-2x) = 1/(2e), the per-mode bound of check_regularizing."""
    return 1.0 / (2.0 * math.e)
