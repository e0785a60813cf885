"""Weighted frequency functions and Carleman commutator forms.

For a solution u and weight Phi, f = chi u exp(Phi/2) satisfies

    f_t = S f + A f + exp(Phi/2) g,
    S f = Δf + (eta + V) f,   A f = -∇Phi·∇f - 1/2 ΔPhi f,

where chi is an optional radial cutoff and g = -2∇chi·∇u - Δchi u is the
rest term it creates. The frequency is N = <-Sf, f> / ||f||².
"""

import logging
import math
from typing import Optional, Sequence, Tuple

import numpy as np

from logconvex_lab.core import stencils
from logconvex_lab.core.errors import (
    InvalidGeometryError,
    InvalidInputError,
    SingularPointError,
    UndefinedRatioError,
)
from logconvex_lab.core.heat import evolve, sample
from logconvex_lab.core.models import (
    CommutatorReport,
    CutoffSpec,
    DifferentialCheck,
    Field,
    FrequencyTrace,
    Grid,
    GridWeightStack,
    InequalityReport,
    SpectralState,
    WeightSpec,
    sphere_area,
)
from logconvex_lab.core.weights import profile_coefficients, stack_on_grid

logger = logging.getLogger(__name__)

# Relative size of boundary samples still treated as zero
_BOUNDARY_TOLERANCE = 1e-10
# ||f||² below this ends a trace
_UNDERFLOW = 1e-280
# Nodes excluded next to the boundary in interior_only mode (two stencil half-widths)
RING_WIDTH = 4


# ---------------------------------------------------------------------------
# Cutoff
# ---------------------------------------------------------------------------

def _check_cutoff(cutoff: CutoffSpec, grid: Grid) -> None:
    if grid.is_radial:
        if any(v != 0.0 for v in cutoff.x0):
            raise InvalidGeometryError("radial grids need a cutoff centred at the origin")
        if cutoff.outer > grid.extents[0]:
            raise InvalidGeometryError(
                f"cutoff radius {cutoff.outer} exceeds the ball radius {grid.extents[0]}"
            )
        return
    if len(cutoff.x0) != len(grid.extents):
        raise InvalidGeometryError("cutoff anchor dimension does not match the grid")
    for c, L in zip(cutoff.x0, grid.extents):
        if c - cutoff.outer < 0.0 or c + cutoff.outer > L:
            raise InvalidGeometryError(
                f"cutoff support B({cutoff.x0}, {cutoff.outer}) leaves the domain"
            )


def cutoff_profile(cutoff: CutoffSpec, r: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """chi, chi' and chi'' as functions of the radius (quintic C² ramp)."""
    width = cutoff.outer - cutoff.inner
    s = np.clip((np.asarray(r, dtype=float) - cutoff.inner) / width, 0.0, 1.0)
    chi = 1.0 - (10 * s ** 3 - 15 * s ** 4 + 6 * s ** 5)
    dchi = -(30 * s ** 2 - 60 * s ** 3 + 30 * s ** 4) / width
    ddchi = -(60 * s - 180 * s ** 2 + 120 * s ** 3) / width ** 2
    return chi, dchi, ddchi


def _cutoff_fields(cutoff: Optional[CutoffSpec], grid: Grid):
    """chi, ∇chi (per axis, or radial derivative) and Δchi on the grid."""
    if cutoff is None:
        return None
    _check_cutoff(cutoff, grid)
    r = grid.distance_from(cutoff.x0)
    chi, dchi, ddchi = cutoff_profile(cutoff, r)
    with np.errstate(divide="ignore", invalid="ignore"):
        lap = ddchi + (grid.n - 1) * np.where(r > 0, dchi / r, 0.0)
    if grid.is_radial:
        grad = (dchi,)
    else:
        coords = grid.coordinates()
        with np.errstate(divide="ignore", invalid="ignore"):
            grad = tuple(np.where(r > 0, dchi * (cx - px) / r, 0.0) for cx, px in zip(coords, cutoff.x0))
    return chi, grad, lap


def rest_source(u: Field, cutoff: CutoffSpec) -> Field:
    """g = -2∇chi·∇u - Δchi u; zero wherever chi is locally constant."""
    _, grad_chi, lap_chi = _cutoff_fields(cutoff, u.grid)
    grad_u = stencils.gradient(u.values, u.grid)
    g = -2 * sum(gc * gu for gc, gu in zip(grad_chi, grad_u)) - lap_chi * u.values
    return u.with_values(g)


# ---------------------------------------------------------------------------
# Operators
# ---------------------------------------------------------------------------

def assemble_f(
    u: Field, weight: WeightSpec, t: float, cutoff: Optional[CutoffSpec] = None
) -> Field:
    """f = (chi u) exp(Phi/2); chi = 1 without a cutoff.

    Raises:
        InvalidGeometryError: If the cutoff support leaves the domain.
    """
    stack = stack_on_grid(weight, u.grid, t)
    values = u.values * np.exp(stack.phi / 2)
    parts = _cutoff_fields(cutoff, u.grid)
    if parts is not None:
        values = values * parts[0]
    return u.with_values(values)


def _boundary_mask(grid: Grid, width: int = 1) -> np.ndarray:
    mask = np.zeros(grid.shape, dtype=bool)
    if grid.is_radial:
        mask[-width:] = True
        return mask
    for axis in range(len(grid.shape)):
        index = [slice(None)] * len(grid.shape)
        index[axis] = slice(0, width)
        mask[tuple(index)] = True
        index[axis] = slice(grid.shape[axis] - width, None)
        mask[tuple(index)] = True
    return mask


def _check_dirichlet(f: Field) -> None:
    if f.grid.is_radial:
        return
    scale = float(np.max(np.abs(f.values)))
    edge = float(np.max(np.abs(f.values[_boundary_mask(f.grid)])))
    if edge > _BOUNDARY_TOLERANCE * max(scale, 1e-300):
        raise InvalidInputError(f"f does not vanish on the boundary (max {edge:.3e})")


def _check_singular(f: Field, stack: GridWeightStack) -> None:
    if np.any(stack.singular & (f.values != 0.0)):
        raise SingularPointError("f must vanish where the weight derivatives are singular")


def _radial_component(grads: Tuple[np.ndarray, ...], stack: GridWeightStack, grid: Grid) -> np.ndarray:
    if grid.is_radial:
        return grads[0]
    return sum(u * g for u, g in zip(stack.unit, grads))


def _S(values: np.ndarray, stack: GridWeightStack, grid: Grid) -> np.ndarray:
    return stencils.laplacian(values, grid) + (stack.eta + stack.potential) * values


def _A(values: np.ndarray, stack: GridWeightStack, grid: Grid) -> np.ndarray:
    grads = stencils.gradient(values, grid)
    return -stack.phi_r * _radial_component(grads, stack, grid) - 0.5 * stack.laplacian * values


def _prepare(f: Field, weight: WeightSpec, t: float, mu: float) -> GridWeightStack:
    _check_dirichlet(f)
    stack = stack_on_grid(weight, f.grid, t, mu)
    _check_singular(f, stack)
    return stack


def apply_operators(f: Field, weight: WeightSpec, t: float, mu: float = 0.0) -> Tuple[Field, Field]:
    """Sf = Δf + (eta + V) f and Af = -∇Phi·∇f - 1/2 ΔPhi f.

    Raises:
        InvalidInputError: f nonzero on the boundary, or the grid is too
            coarse for the stencils.
        SingularPointError: f nonzero at a singular weight node.
    """
    stack = _prepare(f, weight, t, mu)
    Sf = _S(f.values, stack, f.grid)
    Af = _A(f.values, stack, f.grid)
    return f.with_values(Sf), f.with_values(Af)


def _energy(f: Field, stack: GridWeightStack, weights: np.ndarray) -> Tuple[float, float]:
    """(<-Sf, f> via integration by parts, ||f||²)."""
    grads = stencils.gradient(f.values, f.grid)
    grad_sq = sum(g * g for g in grads)
    f_sq = f.values ** 2
    form = float(np.sum((grad_sq - (stack.eta + stack.potential) * f_sq) * weights))
    return form, float(np.sum(f_sq * weights))


def frequency_value(f: Field, weight: WeightSpec, t: float, mu: float = 0.0) -> float:
    """N = (∫|∇f|² - ∫(eta + V) f²) / ||f||².

    Raises:
        UndefinedRatioError: If ||f|| = 0.
    """
    stack = _prepare(f, weight, t, mu)
    form, norm_sq = _energy(f, stack, f.grid.weights)
    if norm_sq == 0.0:
        raise UndefinedRatioError("frequency is undefined for a zero field")
    return form / norm_sq


def _boundary_term(f: Field, stack: GridWeightStack, weight: WeightSpec) -> float:
    """∫_∂ ∂_ν f · Af dσ = -∫_∂ |∂_ν f|² ∂_ν Phi dσ.

    For the quadratic and heat-kernel families this equals
    (1/(2 Upsilon)) ∫_∂ |∂_ν f|² (x - x0)·ν dσ.
    """
    grid = f.grid
    if grid.is_radial:
        R = grid.extents[0]
        h = grid.spacing[0]
        a, b, c, s = profile_coefficients(weight)
        dphi = (-2 * a * R + b * s * R ** (s - 1)) / stack.upsilon
        normal_derivative = -2.0 * f.values[-1] / h
        return float(-sphere_area(grid.n) * R ** (grid.n - 1) * normal_derivative ** 2 * dphi)

    grads = stencils.gradient(f.values, grid)
    total = 0.0
    dims = len(grid.shape)
    for axis in range(dims):
        # quadrature along the remaining axes
        other = [k for k in range(dims) if k != axis]
        for end, sign in ((0, -1.0), (grid.shape[axis] - 1, 1.0)):
            index = [slice(None)] * dims
            index[axis] = end
            index = tuple(index)
            normal_flux = stack.phi_r[index] * stack.unit[axis][index] * sign
            density = -grads[axis][index] ** 2 * normal_flux
            if other:
                k = other[0]
                w = np.full(grid.shape[k], grid.spacing[k])
                w[0] = w[-1] = grid.spacing[k] / 2
                total += float(np.sum(density * w))
            else:
                total += float(density)
    return total


def _quadrature_weights(grid: Grid, interior_only: bool) -> np.ndarray:
    if not interior_only:
        return grid.weights
    return np.where(_boundary_mask(grid, RING_WIDTH), 0.0, grid.weights)


def commutator_form(
    f: Field,
    weight: WeightSpec,
    t: float,
    mu: float = 0.0,
    interior_only: bool = False,
) -> CommutatorReport:
    """Evaluate <-(S' + [S, A]) f, f> twice and compare with (1/Upsilon) <-Sf, f>.

    lhs composes the discrete operators directly:
    -∫ d_t eta f² - <S(Af), f> + <A(Sf), f>. rhs_formula integrates

        -2∫ ∇f·∇²Phi ∇f + 1/2 ∫ Δ²Phi f² - ∫ (d_t eta + ∇Phi·∇eta) f²
        + 2 mu ∫ ∇Phi·x/|x|⁴ f².

    Args:
        f: Field vanishing on the boundary.
        weight: Weight family.
        t: Time.
        mu: Inverse-square potential (radial grids only).
        interior_only: Drop a ring of RING_WIDTH nodes at the boundary from
            every quadrature; the report records the ring width.
    """
    stack = _prepare(f, weight, t, mu)
    grid = f.grid
    w = _quadrature_weights(grid, interior_only)
    v = f.values
    f_sq = v * v

    Sf = _S(v, stack, grid)
    Af = _A(v, stack, grid)
    SAf = _S(Af, stack, grid)
    ASf = _A(Sf, stack, grid)
    lhs = float(np.sum((-stack.dt_eta * f_sq - SAf * v + ASf * v) * w))

    grads = stencils.gradient(v, grid)
    radial = _radial_component(grads, stack, grid)
    grad_sq = sum(g * g for g in grads)
    hessian_form = stack.phi_rr * radial ** 2 + stack.phi_r_over_r * (grad_sq - radial ** 2)
    density = (
        -2 * hessian_form
        + 0.5 * stack.bilaplacian * f_sq
        - (stack.dt_eta + stack.phi_r * stack.eta_r) * f_sq
    )
    if grid.is_radial and mu != 0.0:
        density = density + 2 * mu * stack.phi_r / stack.r ** 3 * f_sq
    rhs_formula = float(np.sum(density * w))

    form = float(np.sum((grad_sq - (stack.eta + stack.potential) * f_sq) * w))
    return CommutatorReport(
        lhs=lhs,
        rhs_formula=rhs_formula,
        comparator=stack.rate * form,
        boundary_term=_boundary_term(f, stack, weight),
        upsilon=stack.upsilon,
        rate=stack.rate,
        excluded_ring=RING_WIDTH if interior_only else 0,
    )


# ---------------------------------------------------------------------------
# Traces and differential inequalities
# ---------------------------------------------------------------------------

def _snapshot(
    u0: SpectralState,
    weight: WeightSpec,
    t: float,
    mu: float,
    cutoff: Optional[CutoffSpec],
    grid: Optional[Grid],
    with_rest: bool = True,
) -> Tuple[float, float, float, float]:
    """(||f||², N, ||exp(Phi/2) g||², boundary term) at time t."""
    u = sample(evolve(u0, u0.t + t), grid)
    f = assemble_f(u, weight, t, cutoff)
    stack = _prepare(f, weight, t, mu)
    form, norm_sq = _energy(f, stack, f.grid.weights)
    if norm_sq < _UNDERFLOW or not math.isfinite(norm_sq):
        return norm_sq, math.nan, math.nan, math.nan
    rest = 0.0
    if cutoff is not None and with_rest:
        g = rest_source(u, cutoff).values * np.exp(stack.phi / 2)
        rest = float(np.sum(g * g * f.grid.weights))
    return norm_sq, form / norm_sq, rest, _boundary_term(f, stack, weight)


def frequency_trace(
    u0: SpectralState,
    weight: WeightSpec,
    times: Sequence[float],
    mu: float = 0.0,
    cutoff: Optional[CutoffSpec] = None,
    grid: Optional[Grid] = None,
) -> FrequencyTrace:
    """||f||², N, rest and boundary terms at the given times (no derivatives).

    Raises:
        InvalidInputError: If times are not strictly increasing inside [0, T].
    """
    times = [float(t) for t in times]
    if any(b <= a for a, b in zip(times, times[1:])):
        raise InvalidInputError("trace times must be strictly increasing")
    if times and (times[0] < 0 or times[-1] > weight.T):
        raise InvalidInputError(f"trace times must lie in [0, {weight.T}]")
    trace = FrequencyTrace()
    for t in times:
        norm_sq, N, rest_sq, boundary = _snapshot(u0, weight, t, mu, cutoff, grid)
        if norm_sq < _UNDERFLOW or not math.isfinite(N):
            trace.truncated = True
            trace.truncated_at = t
            logger.warning(f"frequency trace truncated at t={t:.6g}: ||f||^2={norm_sq:.3e}")
            break
        trace.times.append(t)
        trace.f_norm_sq.append(norm_sq)
        trace.frequency.append(N)
        trace.rest_term.append(rest_sq / norm_sq)
        trace.boundary_term.append(boundary)
    return trace


def _richardson(fn, t: float, step: float) -> float:
    """Central difference with one Richardson step: (4 D(step/2) - D(step)) / 3."""
    def central(delta: float) -> float:
        return (fn(t + delta) - fn(t - delta)) / (2 * delta)
    return (4 * central(step / 2) - central(step)) / 3


def verify_differential_inequalities(
    u0: SpectralState,
    weight: WeightSpec,
    sample_count: int = 20,
    mu: float = 0.0,
    cutoff: Optional[CutoffSpec] = None,
    tolerance: float = 1e-6,
    grid: Optional[Grid] = None,
) -> DifferentialCheck:
    """Check the energy and frequency inequalities along a trace.

    At interior sample times of (0, T):

        (i)  |1/2 d/dt ||f||² + N ||f||²| <= ||exp(Phi/2) g|| ||f||
        (ii) dN/dt <= rate N + ||exp(Phi/2) g||² / ||f||²

    with rate = 1/Upsilon (0 for the zero family). Slacks are divided by
    ||f||² max(1, |N|) and by max(1, |N|) respectively. Time derivatives use
    extrapolated central differences with step 1e-4 T. The trace stops with
    a flag once ||f||² underflows.

    Raises:
        InvalidInputError: For a zero initial state or too few samples.
    """
    if u0.is_zero:
        raise InvalidInputError("differential inequalities need a nonzero initial state")
    if sample_count < 1:
        raise InvalidInputError("need at least one sample")
    T = weight.T
    step = 1e-4 * T
    times = np.linspace(0.0, T, sample_count + 2)[1:-1]

    def norm_sq_at(t: float) -> float:
        return _snapshot(u0, weight, t, mu, cutoff, grid, with_rest=False)[0]

    def frequency_at(t: float) -> float:
        return _snapshot(u0, weight, t, mu, cutoff, grid, with_rest=False)[1]

    trace = FrequencyTrace()
    energy_lhs, energy_rhs, energy_slack = [], [], []
    freq_lhs, freq_rhs, freq_slack = [], [], []
    has_rate = weight.family != "zero"

    for t in times:
        norm_sq, N, rest_sq, boundary = _snapshot(u0, weight, float(t), mu, cutoff, grid)
        if norm_sq < _UNDERFLOW or not math.isfinite(N):
            trace.truncated = True
            trace.truncated_at = float(t)
            logger.warning(f"frequency trace truncated at t={t:.6g}: ||f||^2={norm_sq:.3e}")
            break
        rest = rest_sq / norm_sq
        trace.times.append(float(t))
        trace.f_norm_sq.append(norm_sq)
        trace.frequency.append(N)
        trace.rest_term.append(rest)
        trace.boundary_term.append(boundary)

        scale = max(1.0, abs(N))
        d_norm = _richardson(norm_sq_at, float(t), step)
        lhs_i = abs(0.5 * d_norm + N * norm_sq)
        rhs_i = math.sqrt(rest_sq * norm_sq)
        energy_lhs.append(lhs_i)
        energy_rhs.append(rhs_i)
        energy_slack.append((rhs_i - lhs_i) / (norm_sq * scale))

        d_freq = _richardson(frequency_at, float(t), step)
        rhs_ii = (1.0 / weight.upsilon(float(t)) if has_rate else 0.0) * N + rest
        freq_lhs.append(d_freq)
        freq_rhs.append(rhs_ii)
        freq_slack.append((rhs_ii - d_freq) / scale)

    context = {
        "family": weight.family,
        "T": T,
        "hbar": weight.hbar,
        "mu": mu,
        "cutoff": None if cutoff is None else [cutoff.inner, cutoff.outer],
        "times": list(trace.times),
    }
    energy = InequalityReport.from_sides(
        "energy_identity", energy_lhs, energy_rhs, tolerance, context=context, slack=energy_slack
    )
    frequency = InequalityReport.from_sides(
        "frequency_growth", freq_lhs, freq_rhs, tolerance, context=context, slack=freq_slack
    )
    return DifferentialCheck(trace=trace, energy=energy, frequency=frequency)


def interpolation_exponent(t1: float, t2: float, t3: float, T: float, hbar: float) -> float:
    """M = (ln(T - t2 + hbar) - ln(T - t3 + hbar)) / (ln(T - t1 + hbar) - ln(T - t2 + hbar))."""
    u1, u2, u3 = (T - t + hbar for t in (t1, t2, t3))
    return (math.log(u2) - math.log(u3)) / (math.log(u1) - math.log(u2))


def _window(trace: FrequencyTrace, lo: float, hi: float) -> Tuple[np.ndarray, np.ndarray]:
    times = np.asarray(trace.times)
    rest = np.asarray(trace.rest_term)
    inside = (times > lo) & (times < hi)
    t = np.concatenate(([lo], times[inside], [hi]))
    r = np.concatenate(([np.interp(lo, times, rest)], rest[inside], [np.interp(hi, times, rest)]))
    return t, r


def localized_defect(trace: FrequencyTrace, t1: float, t2: float, t3: float, T: float, hbar: float) -> float:
    """The constant D that the rest term adds to the three-time inequality.

    D = M ((t2 - t1) ∫_{t1}^{t2} rest + ∫_{t1}^{t2} sqrt(rest))
        + (T - t2 + hbar) ln((T - t2 + hbar)/(T - t3 + hbar)) ∫_{t2}^{t3} rest
        + ∫_{t2}^{t3} sqrt(rest),

    with trapezoid time integrals over the trace samples.
    """
    M = interpolation_exponent(t1, t2, t3, T, hbar)
    ta, ra = _window(trace, t1, t2)
    tb, rb = _window(trace, t2, t3)
    first = (t2 - t1) * np.trapezoid(ra, ta) + np.trapezoid(np.sqrt(ra), ta)
    u2, u3 = T - t2 + hbar, T - t3 + hbar
    second = u2 * math.log(u2 / u3) * np.trapezoid(rb, tb) + np.trapezoid(np.sqrt(rb), tb)
    return float(M * first + second)


def three_time_interpolation(
    trace: FrequencyTrace,
    t1: float,
    t2: float,
    t3: float,
    T: float,
    hbar: float,
    tolerance: float = 1e-10,
    localized: bool = False,
) -> InequalityReport:
    """Check (||f(t2)||²)^{1+M} <= (||f(t1)||²)^M ||f(t3)||² exp(2D) in log space.

    ||f||² at t1, t2, t3 is read from the trace (log-linear interpolation
    between samples). D is 0 unless ``localized``. The tolerance is
    relative to max(1, (1 + M) |ln ||f(t2)||²|).

    Raises:
        InvalidInputError: Unordered times or times outside the trace.
    """
    if not 0 <= t1 < t2 < t3 <= T:
        raise InvalidInputError(f"need 0 <= t1 < t2 < t3 <= T, got ({t1}, {t2}, {t3}, T={T})")
    if not trace.times or t1 < trace.times[0] - 1e-12 or t3 > trace.times[-1] + 1e-12:
        raise InvalidInputError("interpolation times must lie inside the trace")
    M = interpolation_exponent(t1, t2, t3, T, hbar)
    log_norms = np.log(np.asarray(trace.f_norm_sq))
    l1, l2, l3 = (float(np.interp(t, trace.times, log_norms)) for t in (t1, t2, t3))
    D = localized_defect(trace, t1, t2, t3, T, hbar) if localized else 0.0
    lhs = (1 + M) * l2
    rhs = M * l1 + l3 + 2 * D
    scale = max(1.0, abs(lhs))
    return InequalityReport.from_sides(
        "three_time_interpolation",
        [lhs],
        [rhs],
        tolerance,
        context={"t": [t1, t2, t3], "T": T, "hbar": hbar, "M": M, "D": D},
        log_scale=True,
        slack=[(rhs - lhs) / scale],
    )


def trace_triples(trace: FrequencyTrace) -> Sequence[Tuple[float, float, float]]:
    """Every ordered triple of sample times."""
    times = trace.times
    return [
        (times[i], times[j], times[k])
        for i in range(len(times))
        for j in range(i + 1, len(times))
        for k in range(j + 1, len(times))
    ]
