"""Quadrature grids and Dirichlet eigenbases.

Interval and rectangle bases are analytic sine modes. The radial
Schrödinger basis comes from a cell-centred finite-volume discretization of
-Δ - μ/|x|² restricted to spherically symmetric functions on the ball,
symmetrized with the lumped cell volumes and solved by Sturm-sequence
bisection.
"""

import logging
import math
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.linalg import LinAlgError, eigh_tridiagonal

from logconvex_lab.core.errors import (
    InvalidGeometryError,
    InvalidInputError,
    NumericalFailure,
    SupercriticalError,
)
from logconvex_lab.core.models import (
    Annulus,
    Box,
    DomainSpec,
    EigenSystem,
    Field,
    Grid,
    Region,
    sphere_area,
)

logger = logging.getLogger(__name__)

DEFAULT_CELLS = 1024
DEFAULT_MODES = 64

# Relative residual above which a radial eigenpair is rejected
_RESIDUAL_TOLERANCE = 1e-8


# ---------------------------------------------------------------------------
# Grids
# ---------------------------------------------------------------------------

def _axis_weights(cells: int, h: float, rule: str) -> np.ndarray:
    w = np.full(cells + 1, h)
    if rule == "trapezoid":
        w[0] = w[-1] = h / 2
    elif rule == "simpson":
        if cells % 2:
            raise InvalidInputError("Simpson's rule needs an even number of cells")
        w[1:-1:2] = 4 * h / 3
        w[2:-1:2] = 2 * h / 3
        w[0] = w[-1] = h / 3
    else:
        raise InvalidInputError(f"unknown quadrature rule: {rule!r}")
    return w


def _interval_piece_weights(nodes: np.ndarray, h: float, p: float, q: float) -> np.ndarray:
    """Exact integrals of the hat functions over [p, q].

    These are the weights of the piecewise-linear interpolant, so they
    reproduce the trapezoid rule on the full axis and sum to q - p.
    """
    left = nodes - h
    right = nodes + h
    # left half of each hat: (x - x_{i-1}) / h on [x_{i-1}, x_i]
    a = np.clip(p, left, nodes)
    b = np.clip(q, left, nodes)
    w = ((b - left) ** 2 - (a - left) ** 2) / (2 * h)
    # right half: (x_{i+1} - x) / h on [x_i, x_{i+1}]
    a = np.clip(p, nodes, right)
    b = np.clip(q, nodes, right)
    w += ((right - a) ** 2 - (right - b) ** 2) / (2 * h)
    return w


def _merge_intervals(pieces: List[Tuple[float, float]]) -> List[Tuple[float, float]]:
    merged: List[Tuple[float, float]] = []
    for lo, hi in sorted(pieces):
        if merged and lo <= merged[-1][1]:
            merged[-1] = (merged[-1][0], max(merged[-1][1], hi))
        else:
            merged.append((lo, hi))
    return merged


def _intervals_of(region: Union[Box, Annulus]) -> List[Tuple[float, float]]:
    if isinstance(region, Box):
        return [(region.lower[0], region.upper[0])]
    c = region.center[0]
    if region.r_inner == 0:
        return [(c - region.r_outer, c + region.r_outer)]
    return [(c - region.r_outer, c - region.r_inner), (c + region.r_inner, c + region.r_outer)]


def _radial_shell_weights(grid: Grid, r_inner: float, r_outer: float) -> np.ndarray:
    h = grid.spacing[0]
    lo = np.clip(grid.axes[0] - h / 2, r_inner, r_outer)
    hi = np.clip(grid.axes[0] + h / 2, r_inner, r_outer)
    return sphere_area(grid.n) * (hi ** grid.n - lo ** grid.n) / grid.n


def inverse_square_weights(grid: Grid) -> np.ndarray:
    """Exact cell integrals of |x|^-2 over the shells of a radial grid.

    Cell i spans [ih, (i + 1)h], so the integral is
    |S^{n-1}| ((i + 1)^{n-2} - i^{n-2}) h^{n-2} / (n - 2), or
    |S^1| ln((i + 1)/i) when n = 2.

    Raises:
        InvalidInputError: For Cartesian grids, or n = 2 (the first cell diverges).
    """
    if not grid.is_radial:
        raise InvalidInputError("inverse-square weights need a radial grid")
    if grid.n <= 2:
        raise InvalidInputError(f"|x|^-2 is not integrable at the origin for n={grid.n}")
    h = grid.spacing[0]
    lo = grid.axes[0] - h / 2
    hi = grid.axes[0] + h / 2
    return sphere_area(grid.n) * (hi ** (grid.n - 2) - lo ** (grid.n - 2)) / (grid.n - 2)


def _rectangle_region_weights(grid: Grid, region: Union[Box, Annulus]) -> np.ndarray:
    if isinstance(region, Box):
        wx = _interval_piece_weights(grid.axes[0], grid.spacing[0], region.lower[0], region.upper[0])
        wy = _interval_piece_weights(grid.axes[1], grid.spacing[1], region.lower[1], region.upper[1])
        return np.outer(wx, wy)
    # Nodal indicator; approximate on a Cartesian grid.
    r = grid.distance_from(region.center)
    mask = (r > region.r_inner) & (r < region.r_outer)
    return np.where(mask, grid.weights, 0.0)


def region_weights(grid: Grid, region: Region) -> np.ndarray:
    """Quadrature weights restricted to a region.

    Args:
        grid: The quadrature grid.
        region: "all", "omega", a Box, an Annulus, or a custom mask array of
            the grid's shape (boolean or fractional).

    Returns:
        Weight array of the grid's shape.

    Raises:
        InvalidInputError: On a mask/grid mismatch or a missing omega.
    """
    if isinstance(region, str):
        if region == "all":
            return grid.weights
        if region == "omega":
            if grid.omega_weights is None:
                raise InvalidInputError("grid has no observation region")
            return grid.omega_weights
        raise InvalidInputError(f"unknown region: {region!r}")
    if isinstance(region, np.ndarray):
        if region.shape != grid.shape:
            raise InvalidInputError(f"mask shape {region.shape} does not match grid {grid.shape}")
        return grid.weights * region.astype(float)
    if isinstance(region, (Box, Annulus)):
        dim = len(region.lower) if isinstance(region, Box) else len(region.center)
        if grid.is_radial:
            if not isinstance(region, Annulus):
                raise InvalidInputError("radial grids accept annuli only")
            return _radial_shell_weights(grid, region.r_inner, region.r_outer)
        if dim != len(grid.axes):
            raise InvalidInputError("region dimension does not match the grid")
        if grid.kind == "interval":
            w = np.zeros(grid.shape)
            for lo, hi in _merge_intervals(_intervals_of(region)):
                w += _interval_piece_weights(grid.axes[0], grid.spacing[0], lo, hi)
            return w
        return _rectangle_region_weights(grid, region)
    raise InvalidInputError(f"unsupported region type: {type(region).__name__}")


def _omega_weights(grid: Grid, omega: Sequence[Union[Box, Annulus]]) -> Optional[np.ndarray]:
    if not omega:
        return None
    if grid.kind == "interval":
        pieces = [p for region in omega for p in _intervals_of(region)]
        w = np.zeros(grid.shape)
        for lo, hi in _merge_intervals(pieces):
            w += _interval_piece_weights(grid.axes[0], grid.spacing[0], lo, hi)
        return w
    if grid.kind == "radial_ball":
        shells = _merge_intervals([(a.r_inner, a.r_outer) for a in omega])
        return sum(_radial_shell_weights(grid, lo, hi) for lo, hi in shells)
    boxes = [r for r in omega if isinstance(r, Box)]
    for i, first in enumerate(boxes):
        for second in boxes[i + 1:]:
            if all(max(a, c) < min(b, d) for a, b, c, d in zip(first.lower, first.upper, second.lower, second.upper)):
                raise InvalidGeometryError("observation boxes on a rectangle must not overlap")
    return sum(_rectangle_region_weights(grid, region) for region in omega)


def build_grid(domain: DomainSpec, cells: int = DEFAULT_CELLS, rule: str = "trapezoid") -> Grid:
    """Build the quadrature grid for a domain.

    Cartesian grids have ``cells + 1`` nodes per axis including the
    boundary. Radial grids have ``cells`` cell centres (i + 1/2)h with
    shell-volume weights, so rho = 0 is never sampled.

    Raises:
        InvalidInputError: If cells < 8.
    """
    if cells < 8:
        raise InvalidInputError(f"grid needs at least 8 cells, got {cells}")

    if domain.kind == "radial_ball":
        R = domain.extents[0]
        h = R / cells
        i = np.arange(cells, dtype=float)
        weights = sphere_area(domain.n) * h ** domain.n * ((i + 1) ** domain.n - i ** domain.n) / domain.n
        grid = Grid(
            kind=domain.kind,
            axes=((i + 0.5) * h,),
            spacing=(h,),
            weights=weights,
            extents=domain.extents,
            n=domain.n,
            origin_offset=True,
            rule="midpoint",
        )
    else:
        axes = []
        spacing = []
        axis_weights = []
        for L in domain.extents:
            h = L / cells
            axes.append(np.linspace(0.0, L, cells + 1))
            spacing.append(h)
            axis_weights.append(_axis_weights(cells, h, rule))
        weights = axis_weights[0]
        for w in axis_weights[1:]:
            weights = np.multiply.outer(weights, w)
        grid = Grid(
            kind=domain.kind,
            axes=tuple(axes),
            spacing=tuple(spacing),
            weights=weights,
            extents=domain.extents,
            n=domain.n,
            rule=rule,
        )

    grid.omega_weights = _omega_weights(grid, domain.omega)
    return grid


def integrate(field: Field, region: Region = "all") -> float:
    """Composite quadrature of a field over a region.

    Args:
        field: Samples on a grid.
        region: See region_weights.

    Returns:
        The integral.
    """
    return float(np.sum(field.values * region_weights(field.grid, region)))


# ---------------------------------------------------------------------------
# Analytic sine bases
# ---------------------------------------------------------------------------

def _check_modes(J_max: int) -> None:
    if int(J_max) != J_max or J_max < 1:
        raise InvalidInputError(f"J_max must be a positive integer, got {J_max}")


def build_interval_basis(L: float, J_max: int, grid: Optional[Grid] = None) -> EigenSystem:
    """Dirichlet eigenpairs of -d²/dx² on (0, L).

    lambda_j = (j pi / L)², e_j(x) = sqrt(2/L) sin(j pi x / L).

    Args:
        L: Interval length.
        J_max: Number of modes.
        grid: Optional interval grid used when sampling.

    Raises:
        InvalidInputError: On nonpositive L or J_max.
    """
    if not L > 0:
        raise InvalidInputError(f"interval length must be positive, got {L}")
    _check_modes(J_max)
    j = np.arange(1, J_max + 1)
    return EigenSystem(
        kind="sine",
        eigenvalues=(j * math.pi / L) ** 2,
        extents=(float(L),),
        modes=j.reshape(-1, 1),
        grid=grid,
        n=1,
    )


def build_rectangle_basis(
    L_x: float, L_y: float, J_max: int, grid: Optional[Grid] = None
) -> EigenSystem:
    """Lowest J_max tensor sine modes of the Dirichlet Laplacian on a rectangle.

    Ties in the eigenvalue are ordered by (j_x, j_y).

    Raises:
        InvalidInputError: On invalid extents or J_max.
    """
    if not (L_x > 0 and L_y > 0):
        raise InvalidInputError(f"rectangle extents must be positive, got ({L_x}, {L_y})")
    _check_modes(J_max)
    candidates = [
        ((jx * math.pi / L_x) ** 2 + (jy * math.pi / L_y) ** 2, jx, jy)
        for jx in range(1, J_max + 1)
        for jy in range(1, J_max + 1)
    ]
    candidates.sort()
    chosen = candidates[:J_max]
    return EigenSystem(
        kind="tensor_sine",
        eigenvalues=np.array([c[0] for c in chosen]),
        extents=(float(L_x), float(L_y)),
        modes=np.array([[c[1], c[2]] for c in chosen]),
        grid=grid,
        n=2,
    )


# ---------------------------------------------------------------------------
# Radial Schrödinger basis
# ---------------------------------------------------------------------------

def radial_operator(n: int, mu: float, grid: Grid) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Finite-volume pieces of -Δ - mu/|x|² on radial cells.

    Returns:
        (stiffness diagonal, stiffness off-diagonal, potential diagonal), all
        per unit sphere area. Cell volumes are grid.weights / |S^{n-1}|.
    """
    N = grid.shape[0]
    h = grid.spacing[0]
    faces = ((np.arange(1, N + 1) * h) ** (n - 1))  # F_{i+1/2}
    diag = np.empty(N)
    diag[0] = faces[0] / h
    diag[1:] = (faces[:-1] + faces[1:]) / h
    # Dirichlet at R: ghost value -v_{N-1} across the outer face
    diag[-1] = faces[-2] / h + 2 * faces[-1] / h
    off = -faces[:-1] / h
    potential = -mu * inverse_square_weights(grid) / sphere_area(n)
    return diag, off, potential


def build_radial_schrodinger_basis(
    n: int, mu: float, R_ball: float, grid: Grid, J_max: int
) -> EigenSystem:
    """Lowest radial eigenpairs of -Δ - mu/|x|² on the ball with Dirichlet data.

    Args:
        n: Space dimension (>= 3).
        mu: Potential coefficient, below (n - 2)²/4.
        R_ball: Ball radius; must match the grid.
        grid: Radial grid from build_grid.
        J_max: Number of eigenpairs (at most the cell count).

    Returns:
        EigenSystem with profiles sampled at the cell centres, normalized to
        unit L² norm in R^n.

    Raises:
        InvalidInputError: Bad dimension, grid or J_max.
        SupercriticalError: mu >= (n - 2)²/4.
        NumericalFailure: The eigensolver failed or left a large residual.
    """
    if n < 3:
        raise InvalidInputError("the radial Schrödinger basis needs n >= 3")
    critical = (n - 2) ** 2 / 4.0
    if mu >= critical:
        raise SupercriticalError(f"mu={mu} is not below the critical value {critical}")
    if not grid.is_radial or grid.n != n:
        raise InvalidInputError("a radial grid of matching dimension is required")
    if not math.isclose(grid.extents[0], R_ball, rel_tol=1e-12):
        raise InvalidInputError(f"grid radius {grid.extents[0]} does not match R_ball={R_ball}")
    _check_modes(J_max)
    N = grid.shape[0]
    if J_max > N:
        raise InvalidInputError(f"J_max={J_max} exceeds the {N} grid cells")

    diag, off, potential = radial_operator(n, mu, grid)
    volumes = grid.weights / sphere_area(n)
    d = (diag + potential) / volumes
    e = off / np.sqrt(volumes[:-1] * volumes[1:])

    try:
        eigenvalues, vectors = eigh_tridiagonal(
            d, e, select="i", select_range=(0, J_max - 1), lapack_driver="stebz"
        )
    except (LinAlgError, ValueError) as exc:
        raise NumericalFailure(f"radial eigensolve failed: {exc}") from exc

    # Residual of the symmetric problem
    applied = d[:, None] * vectors
    applied[:-1] += e[:, None] * vectors[1:]
    applied[1:] += e[:, None] * vectors[:-1]
    residual = float(np.max(np.abs(applied - vectors * eigenvalues)))
    scale = float(np.max(np.abs(d)) + 2 * np.max(np.abs(e)))
    logger.debug(f"radial eigensolve n={n} mu={mu} cells={N}: residual {residual:.3e}")
    if not np.all(np.isfinite(eigenvalues)) or residual > _RESIDUAL_TOLERANCE * scale:
        raise NumericalFailure(
            f"radial eigensolve residual {residual:.3e} exceeds tolerance", residual=residual
        )

    profiles = (vectors / np.sqrt(volumes)[:, None] / math.sqrt(sphere_area(n))).T
    signs = np.where(profiles[:, 0] < 0, -1.0, 1.0)
    profiles *= signs[:, None]

    return EigenSystem(
        kind="radial",
        eigenvalues=eigenvalues,
        extents=(float(R_ball),),
        modes=np.arange(1, J_max + 1).reshape(-1, 1),
        profiles=profiles,
        grid=grid,
        n=n,
        mu=float(mu),
        normalization="unit L2 norm in R^n",
        residual=residual,
    )


def radial_form(values: np.ndarray, grid: Grid, mu: float) -> float:
    """Discrete Schrödinger form ∫|∇v|² - mu ∫v²/|x|² of a radial field."""
    diag, off, potential = radial_operator(grid.n, mu, grid)
    v = np.asarray(values, dtype=float)
    quad = np.dot(diag + potential, v * v) + 2 * np.dot(off, v[:-1] * v[1:])
    return float(sphere_area(grid.n) * quad)


# ---------------------------------------------------------------------------
# Sampling
# ---------------------------------------------------------------------------

def _sine_table(j: np.ndarray, x: np.ndarray, L: float) -> np.ndarray:
    return math.sqrt(2.0 / L) * np.sin(np.outer(j, x) * math.pi / L)


def eigenfunction_values(system: EigenSystem, grid: Optional[Grid] = None) -> np.ndarray:
    """All eigenfunctions on a grid, shape (J_max, *grid.shape).

    Raises:
        InvalidInputError: If no compatible grid is available.
    """
    grid = _sampling_grid(system, grid)
    if system.kind == "radial":
        return system.profiles
    if system.kind == "sine":
        return _sine_table(system.modes[:, 0], grid.axes[0], system.extents[0])
    ex = _sine_table(system.modes[:, 0], grid.axes[0], system.extents[0])
    ey = _sine_table(system.modes[:, 1], grid.axes[1], system.extents[1])
    return ex[:, :, None] * ey[:, None, :]


def _sampling_grid(system: EigenSystem, grid: Optional[Grid]) -> Grid:
    grid = grid if grid is not None else system.grid
    if grid is None:
        raise InvalidInputError("no grid available for sampling")
    if system.kind == "radial":
        if grid is not system.grid and grid.shape != system.profiles.shape[1:]:
            raise InvalidInputError("radial profiles live on the grid they were solved on")
    elif (system.kind == "sine") != (grid.kind == "interval") or grid.is_radial:
        raise InvalidInputError(f"{system.kind} basis cannot be sampled on a {grid.kind} grid")
    elif any(not math.isclose(a, b, rel_tol=1e-12) for a, b in zip(grid.extents, system.extents)):
        raise InvalidInputError("grid extents do not match the eigen-system")
    return grid


def synthesize(system: EigenSystem, coefficients: np.ndarray, grid: Optional[Grid] = None) -> np.ndarray:
    """Sample sum_j a_j e_j on a grid.

    Rectangle modes are combined separably so no (J, Nx, Ny) tensor is built.
    """
    grid = _sampling_grid(system, grid)
    a = np.asarray(coefficients, dtype=float)
    if system.kind == "radial":
        return a @ system.profiles
    if system.kind == "sine":
        return a @ _sine_table(system.modes[:, 0], grid.axes[0], system.extents[0])
    jx = system.modes[:, 0]
    jy = system.modes[:, 1]
    table = np.zeros((int(jx.max()), int(jy.max())))
    np.add.at(table, (jx - 1, jy - 1), a)
    ex = _sine_table(np.arange(1, table.shape[0] + 1), grid.axes[0], system.extents[0])
    ey = _sine_table(np.arange(1, table.shape[1] + 1), grid.axes[1], system.extents[1])
    return ex.T @ table @ ey


def build_basis(
    domain: DomainSpec,
    cells: int = DEFAULT_CELLS,
    modes: int = DEFAULT_MODES,
    rule: str = "trapezoid",
) -> EigenSystem:
    """Grid plus eigen-system for any supported domain."""
    grid = build_grid(domain, cells, rule=rule)
    if domain.kind == "interval":
        return build_interval_basis(domain.extents[0], modes, grid=grid)
    if domain.kind == "rectangle":
        return build_rectangle_basis(domain.extents[0], domain.extents[1], modes, grid=grid)
    return build_radial_schrodinger_basis(domain.n, domain.mu, domain.extents[0], grid, modes)


def gram_matrix(system: EigenSystem, grid: Optional[Grid] = None) -> np.ndarray:
    """Discrete L² Gram matrix of the eigenfunctions."""
    grid = _sampling_grid(system, grid)
    values = eigenfunction_values(system, grid).reshape(system.count, -1)
    w = grid.weights.reshape(-1)
    return (values * w) @ values.T
