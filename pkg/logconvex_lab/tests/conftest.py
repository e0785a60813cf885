"""Pytest configuration and fixtures."""

import math
import shutil
import tempfile
from typing import Generator

import numpy as np
import pytest

from logconvex_lab.core.domain import build_basis
from logconvex_lab.core.models import DomainSpec, EigenSystem, Field, Grid


@pytest.fixture
def temp_dir() -> Generator[str, None, None]:
    """Create a temporary directory for tests."""
    tmpdir = tempfile.mkdtemp()
    yield tmpdir
    shutil.rmtree(tmpdir)


@pytest.fixture
def interval_domain() -> DomainSpec:
    """[0, pi] anchored at pi/2, observed on [1, 2]."""
    return DomainSpec.from_dict({
        "kind": "interval",
        "extents": [math.pi],
        "omega": [{"type": "box", "lower": [1.0], "upper": [2.0]}],
    })


@pytest.fixture
def interval_system(interval_domain: DomainSpec) -> EigenSystem:
    return build_basis(interval_domain, cells=512, modes=32)


@pytest.fixture
def rectangle_domain() -> DomainSpec:
    return DomainSpec.from_dict({
        "kind": "rectangle",
        "extents": [math.pi, math.pi],
        "omega": [{"type": "box", "lower": [1.0, 1.0], "upper": [2.0, 2.0]}],
    })


@pytest.fixture
def rectangle_system(rectangle_domain: DomainSpec) -> EigenSystem:
    return build_basis(rectangle_domain, cells=96, modes=12)


@pytest.fixture
def radial_domain() -> DomainSpec:
    """Unit ball in R^3 without potential."""
    return DomainSpec.from_dict({"kind": "radial_ball", "n": 3, "extents": [1.0]})


@pytest.fixture
def radial_system(radial_domain: DomainSpec) -> EigenSystem:
    return build_basis(radial_domain, cells=600, modes=6)


def bump(grid: Grid, center, radius: float) -> Field:
    """Smooth bump exp(-1/(1 - s²)) with s = |x - center| / radius, zero outside."""
    s = grid.distance_from(center) / radius
    values = np.zeros(grid.shape)
    inside = s < 1
    values[inside] = np.exp(-1.0 / (1.0 - s[inside] ** 2))
    return Field(values=values, grid=grid)
