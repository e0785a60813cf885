"""Fourth-order finite-difference operators on grid samples.

Centred stencils in the interior; one-sided fourth-order stencils on the two
outermost nodes at each end of an axis.
"""

from typing import Tuple

import numpy as np

from logconvex_lab.core.errors import InvalidInputError
from logconvex_lab.core.models import Grid

MIN_NODES = 6

_D1_CENTRAL = np.array([1.0, -8.0, 0.0, 8.0, -1.0]) / 12.0
_D2_CENTRAL = np.array([-1.0, 16.0, -30.0, 16.0, -1.0]) / 12.0

# One-sided stencils for node 0 and node 1, using nodes 0..k
_D1_EDGE = (
    np.array([-25.0, 48.0, -36.0, 16.0, -3.0]) / 12.0,
    np.array([-3.0, -10.0, 18.0, -6.0, 1.0]) / 12.0,
)
_D2_EDGE = (
    np.array([45.0, -154.0, 214.0, -156.0, 61.0, -10.0]) / 12.0,
    np.array([10.0, -15.0, -4.0, 14.0, -6.0, 1.0]) / 12.0,
)


def _apply(values: np.ndarray, axis: int, central: np.ndarray, edge: Tuple[np.ndarray, ...], parity: float) -> np.ndarray:
    f = np.moveaxis(np.asarray(values, dtype=float), axis, 0)
    m = f.shape[0]
    if m < MIN_NODES:
        raise InvalidInputError(f"stencils need at least {MIN_NODES} nodes per axis, got {m}")
    out = np.empty_like(f)
    out[2:-2] = sum(c * f[k:m - 4 + k] for k, c in enumerate(central) if c != 0.0)
    for i, coeffs in enumerate(edge):
        k = len(coeffs)
        out[i] = np.tensordot(coeffs, f[:k], axes=(0, 0))
        # Mirror: reverse the stencil; first derivatives also flip sign
        out[m - 1 - i] = parity * np.tensordot(coeffs, f[::-1][:k], axes=(0, 0))
    return np.moveaxis(out, 0, axis)


def first_derivative(values: np.ndarray, h: float, axis: int = 0) -> np.ndarray:
    """d/dx along one axis."""
    return _apply(values, axis, _D1_CENTRAL, _D1_EDGE, -1.0) / h


def second_derivative(values: np.ndarray, h: float, axis: int = 0) -> np.ndarray:
    """d²/dx² along one axis."""
    return _apply(values, axis, _D2_CENTRAL, _D2_EDGE, 1.0) / h ** 2


def gradient(values: np.ndarray, grid: Grid) -> Tuple[np.ndarray, ...]:
    """Partial derivatives per axis; on radial grids, the single entry is d/drho."""
    return tuple(
        first_derivative(values, h, axis=k) for k, h in enumerate(grid.spacing)
    )


def laplacian(values: np.ndarray, grid: Grid) -> np.ndarray:
    """Δ on Cartesian grids; f'' + (n - 1) f'/rho for radial profiles."""
    if grid.is_radial:
        h = grid.spacing[0]
        rho = grid.axes[0]
        return second_derivative(values, h) + (grid.n - 1) * first_derivative(values, h) / rho
    return sum(second_derivative(values, h, axis=k) for k, h in enumerate(grid.spacing))
