"""Weight families and their derivative bundles.

Every family is separable and radial about its anchor x0:

    Phi(x, t) = phi(|x - x0|) / Upsilon + L(t),   Upsilon = T - t + hbar,

with phi(r) = -a r² + b r^s - c. The quadratic family is (a, b, c) =
(1/4, 0, 0); the heat-kernel family adds L(t) = -(n/2) ln Upsilon; the zero
family is Phi = 0.
"""

import logging
import math
import threading
from typing import Dict, Optional, Sequence, Tuple

import numpy as np

from logconvex_lab.core.domain import inverse_square_weights
from logconvex_lab.core.errors import (
    InvalidInputError,
    SingularPointError,
    UnsupportedError,
)
from logconvex_lab.core.models import (
    Grid,
    GridWeightStack,
    ProfileReport,
    WeightSpec,
    WeightStack,
)

logger = logging.getLogger(__name__)

_CACHE_LIMIT = 64
_local = threading.local()


def profile_coefficients(spec: WeightSpec) -> Tuple[float, float, float, float]:
    """(a, b, c, s) of the spatial profile phi for a family."""
    if spec.family == "radial_poly":
        return spec.a, spec.b, spec.c, spec.s
    if spec.family == "zero":
        return 0.0, 0.0, 0.0, 2.0
    return 0.25, 0.0, 0.0, 2.0


def _has_log_term(spec: WeightSpec) -> bool:
    return spec.family == "heat_kernel" and spec.log_term


def _profile(a: float, b: float, c: float, s: float, r: np.ndarray, d: int) -> Dict[str, np.ndarray]:
    """phi and its radial derivatives; entries at r = 0 are only meaningful when b = 0."""
    r = np.asarray(r, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        rs = r ** s if b else np.zeros_like(r)
        rs1 = r ** (s - 1) if b else np.zeros_like(r)
        rs2 = r ** (s - 2) if b else np.zeros_like(r)
        rs4 = r ** (s - 4) if b else np.zeros_like(r)
    phi = -a * r ** 2 + b * rs - c
    phi_r = -2 * a * r + b * s * rs1
    phi_rr = -2 * a + b * s * (s - 1) * rs2
    phi_r_over_r = -2 * a + b * s * rs2
    return {
        "phi": phi,
        "phi_r": phi_r,
        "phi_rr": phi_rr,
        "phi_r_over_r": phi_r_over_r,
        "laplacian": phi_rr + (d - 1) * phi_r_over_r,
        "bilaplacian": b * s * (s + d - 2) * (s - 2) * (s + d - 4) * rs4,
    }


def _time_terms(spec: WeightSpec, upsilon: float) -> Tuple[float, float, float]:
    """L(t), dL/dt, d²L/dt² of the additive time term."""
    if not _has_log_term(spec):
        return 0.0, 0.0, 0.0
    half_n = spec.n / 2.0
    return -half_n * math.log(upsilon), half_n / upsilon, half_n / upsilon ** 2


def _upsilon(spec: WeightSpec, t: float) -> float:
    if t > spec.T:
        raise InvalidInputError(f"t={t} is past the final time T={spec.T}")
    return spec.upsilon(t)


def eval_weight_stack(spec: WeightSpec, x: Sequence[float], t: float, mu: float = 0.0) -> WeightStack:
    """Closed-form derivative bundle of Phi at one point.

    eta is 1/2 dPhi/dt + 1/4 |∇Phi|², plus mu/|x|² (potential centred at
    the origin) when mu is nonzero.

    Args:
        spec: Weight family.
        x: Evaluation point; its length is the space dimension.
        t: Time, at most spec.T.
        mu: Inverse-square potential coefficient.

    Raises:
        SingularPointError: At x = x0 for radial_poly, or x = 0 with mu != 0.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    x0 = np.asarray(spec.x0, dtype=float)
    if x.shape != x0.shape:
        raise InvalidInputError("point and anchor have different dimensions")
    d = len(x)
    upsilon = _upsilon(spec, t)
    a, b, c, s = profile_coefficients(spec)

    offset = x - x0
    r = float(np.linalg.norm(offset))
    if r == 0.0 and b != 0.0:
        raise SingularPointError("radial_poly derivatives are singular at the anchor")
    radius = float(np.linalg.norm(x))
    if mu != 0.0 and radius == 0.0:
        raise SingularPointError("the inverse-square potential is singular at the origin")

    p = {k: float(v) for k, v in _profile(a, b, c, s, np.array(r), d).items()}
    unit = offset / r if r > 0 else np.zeros(d)
    outer = np.outer(unit, unit)
    L, Lt, Ltt = _time_terms(spec, upsilon)

    grad = p["phi_r"] * unit / upsilon
    hessian = (p["phi_rr"] * outer + p["phi_r_over_r"] * (np.eye(d) - outer)) / upsilon
    dt = p["phi"] / upsilon ** 2 + Lt
    dtt = 2 * p["phi"] / upsilon ** 3 + Ltt
    grad_dt = p["phi_r"] * unit / upsilon ** 2

    eta = 0.5 * dt + 0.25 * float(grad @ grad)
    eta_r = 0.5 * p["phi_r"] / upsilon ** 2 + 0.5 * p["phi_r"] * p["phi_rr"] / upsilon ** 2
    grad_eta = eta_r * unit
    if mu != 0.0:
        eta += mu / radius ** 2
        grad_eta = grad_eta - 2 * mu * x / radius ** 4
    dt_eta = 0.5 * dtt + 0.5 * p["phi_r"] ** 2 / upsilon ** 3

    return WeightStack(
        phi=p["phi"] / upsilon + L,
        grad=grad,
        hessian=hessian,
        laplacian=p["laplacian"] / upsilon,
        bilaplacian=p["bilaplacian"] / upsilon,
        dt=dt,
        dtt=dtt,
        grad_dt=grad_dt,
        eta=eta,
        grad_eta=grad_eta,
        dt_eta=dt_eta,
        upsilon=upsilon,
    )


def _cache() -> Dict[tuple, Tuple[Grid, GridWeightStack]]:
    cache = getattr(_local, "stacks", None)
    if cache is None:
        cache = _local.stacks = {}
    return cache


def _spec_key(spec: WeightSpec) -> tuple:
    return (spec.family, spec.x0, spec.T, spec.hbar, spec.a, spec.b, spec.c, spec.s, spec.n, spec.log_term)


def stack_on_grid(spec: WeightSpec, grid: Grid, t: float, mu: float = 0.0) -> GridWeightStack:
    """Derivative bundle sampled on a grid, cached per (grid, t) and per thread.

    Here eta is the potential-free part 1/2 dPhi/dt + 1/4 |∇Phi|²; the
    potential mu/rho² is stored separately as its cell average. Singular nodes (the anchor for
    radial_poly) hold zeros and are flagged in ``singular``.

    Raises:
        UnsupportedError: mu != 0 on a Cartesian grid.
        InvalidInputError: A radial grid with a non-origin anchor.
    """
    key = (id(grid), grid.shape, grid.extents, float(t), float(mu), _spec_key(spec))
    cache = _cache()
    hit = cache.get(key)
    if hit is not None and hit[0] is grid:
        return hit[1]

    if mu != 0.0 and not grid.is_radial:
        raise UnsupportedError("the inverse-square potential is only discretized on radial grids")
    if grid.is_radial and any(v != 0.0 for v in spec.x0):
        raise InvalidInputError("radial grids need a weight anchored at the origin")

    upsilon = _upsilon(spec, t)
    a, b, c, s = profile_coefficients(spec)
    d = grid.n
    r = grid.distance_from(spec.x0)
    if grid.is_radial:
        unit: Tuple[np.ndarray, ...] = (np.ones(grid.shape),)
    else:
        coords = grid.coordinates()
        with np.errstate(divide="ignore", invalid="ignore"):
            unit = tuple(np.where(r > 0, (cx - px) / r, 0.0) for cx, px in zip(coords, spec.x0))

    singular = (r == 0.0) & (b != 0.0)
    p = _profile(a, b, c, s, r, d)
    # phi itself is finite at the anchor; only its derivatives blow up
    for k in p:
        if k != "phi":
            p[k] = np.where(singular, 0.0, p[k])
    L, Lt, Ltt = _time_terms(spec, upsilon)

    phi_r = p["phi_r"] / upsilon
    phi_rr = p["phi_rr"] / upsilon
    dt = p["phi"] / upsilon ** 2 + Lt
    dtt = 2 * p["phi"] / upsilon ** 3 + Ltt
    dt_r = p["phi_r"] / upsilon ** 2
    if grid.is_radial and mu != 0.0:
        # cell average, so potential * weights integrates mu/rho² exactly per shell
        potential = mu * inverse_square_weights(grid) / grid.weights
    else:
        potential = np.zeros(grid.shape)

    stack = GridWeightStack(
        r=r,
        unit=unit,
        phi=p["phi"] / upsilon + L,
        phi_r=phi_r,
        phi_rr=phi_rr,
        phi_r_over_r=p["phi_r_over_r"] / upsilon,
        laplacian=p["laplacian"] / upsilon,
        bilaplacian=p["bilaplacian"] / upsilon,
        dt=dt,
        dtt=dtt,
        dt_r=dt_r,
        eta=0.5 * dt + 0.25 * phi_r ** 2,
        eta_r=0.5 * dt_r + 0.5 * phi_r * phi_rr,
        dt_eta=0.5 * dtt + 0.5 * phi_r * dt_r,
        potential=potential,
        singular=singular,
        upsilon=upsilon,
        rate=0.0 if spec.family == "zero" else 1.0 / upsilon,
    )

    if len(cache) >= _CACHE_LIMIT:
        cache.clear()
    cache[key] = (grid, stack)
    return stack


def clear_cache() -> None:
    """Drop this thread's cached grid stacks."""
    _cache().clear()


def profile_value(a: float, b: float, c: float, s: float, rho: np.ndarray) -> np.ndarray:
    """W(rho) = -a rho² + b rho^s - c."""
    rho = np.asarray(rho, dtype=float)
    return -a * rho ** 2 + b * rho ** s - c


def critical_radius(a: float, b: float, s: float) -> Optional[float]:
    """Positive root of W'(rho) = 0, or None when W is monotone on (0, ∞)."""
    if a <= 0 or b <= 0 or s >= 2:
        return None
    return (b * s / (2 * a)) ** (1.0 / (2 - s))


def weight_profile(params: Sequence[float], rho_samples: Sequence[float]) -> ProfileReport:
    """Sample W and W' and decide nonpositivity and monotonicity on [1, ∞).

    Args:
        params: (a, b, c, s).
        rho_samples: Positive sample radii.

    Returns:
        ProfileReport. ``supremum`` is the exact maximum of W over [0, ∞)
        (at the critical radius when it exists).
    """
    a, b, c, s = (float(v) for v in params)
    rho = np.asarray(rho_samples, dtype=float)
    if rho.size == 0 or np.any(rho <= 0):
        raise InvalidInputError("rho samples must be positive")
    values = profile_value(a, b, c, s, rho)
    derivative = -2 * a * rho + b * s * rho ** (s - 1)

    rc = critical_radius(a, b, s)
    candidates = [-c]
    if rc is not None:
        candidates.append(float(profile_value(a, b, c, s, rc)))
    supremum = max(candidates)

    beyond = rho >= 1.0
    if rc is not None:
        decreasing = rc <= 1.0
    else:
        decreasing = bool(np.all(derivative[beyond] < 0)) if np.any(beyond) else True

    return ProfileReport(
        rho=rho.tolist(),
        values=values.tolist(),
        derivative=derivative.tolist(),
        critical_radius=rc,
        value_at_zero=-c,
        supremum=supremum,
        nonpositive=supremum <= 1e-15,
        decreasing_beyond_one=bool(decreasing),
    )


def _profile_extrema(a: float, b: float, c: float, s: float, lo: float, hi: float) -> Tuple[float, float]:
    points = [lo, hi]
    rc = critical_radius(a, b, s)
    if rc is not None and lo < rc < hi:
        points.append(rc)
    values = [float(profile_value(a, b, c, s, p)) for p in points]
    return min(values), max(values)


def weight_gap(spec: WeightSpec, R: float, delta: float, R0: float) -> float:
    """max phi on (1 + 3 delta/2) R <= r <= R0 minus min phi on r <= (1 + delta) R.

    A negative gap is what localization needs.

    Raises:
        InvalidInputError: On delta outside (0, 1] or R0 below the inner annulus radius.
    """
    if not 0 < delta <= 1:
        raise InvalidInputError("delta must lie in (0, 1]")
    inner = (1 + 1.5 * delta) * R
    if R <= 0 or R0 < inner:
        raise InvalidInputError(f"R0={R0} must be at least (1 + 3 delta/2) R = {inner}")
    a, b, c, s = profile_coefficients(spec)
    _, annulus_max = _profile_extrema(a, b, c, s, inner, R0)
    ball_min, _ = _profile_extrema(a, b, c, s, 0.0, (1 + delta) * R)
    return annulus_max - ball_min


def quadratic_gap(R: float, delta: float) -> float:
    """Closed form -1/4 (1 + 3 delta/2)² R² + 1/4 (1 + delta)² R²."""
    return -0.25 * (1 + 1.5 * delta) ** 2 * R ** 2 + 0.25 * (1 + delta) ** 2 * R ** 2
