"""Tests for logconvex_lab.core.weights module."""

import math

import numpy as np
import pytest

from logconvex_lab.core.domain import build_grid
from logconvex_lab.core.errors import InvalidInputError, SingularPointError, UnsupportedError
from logconvex_lab.core.models import WeightSpec
from logconvex_lab.core.weights import (
    clear_cache,
    critical_radius,
    eval_weight_stack,
    quadratic_gap,
    stack_on_grid,
    weight_gap,
    weight_profile,
)


def _phi(spec, x, t):
    return eval_weight_stack(spec, x, t).phi


class TestEvalWeightStack:
    """Tests for eval_weight_stack() against finite differences."""

    @pytest.fixture
    def heat_kernel(self):
        return WeightSpec(family="heat_kernel", x0=(0.5, 0.5), T=1.0, hbar=0.2, n=2)

    @pytest.fixture
    def annulus(self):
        return WeightSpec(family="radial_poly", x0=(0.0, 0.0, 0.0), T=1.0, hbar=0.1, n=3)

    def test_quadratic_values(self):
        spec = WeightSpec(family="quadratic", x0=(0.0,), T=1.0, hbar=0.1)
        stack = eval_weight_stack(spec, (1.0,), 0.5)

        assert stack.upsilon == pytest.approx(0.6)
        assert stack.phi == pytest.approx(-0.25 / 0.6)
        assert stack.grad[0] == pytest.approx(-0.5 / 0.6)
        assert stack.dt == pytest.approx(-0.25 / 0.36)

    def test_gradient(self, heat_kernel):
        x = np.array([0.9, 0.2])
        stack = eval_weight_stack(heat_kernel, x, 0.3)
        h = 1e-6
        for i in range(2):
            e = np.zeros(2)
            e[i] = h
            fd = (_phi(heat_kernel, x + e, 0.3) - _phi(heat_kernel, x - e, 0.3)) / (2 * h)
            assert stack.grad[i] == pytest.approx(fd, rel=1e-6)

    def test_time_derivative(self, heat_kernel):
        x = (0.9, 0.2)
        h = 1e-6
        fd = (_phi(heat_kernel, x, 0.3 + h) - _phi(heat_kernel, x, 0.3 - h)) / (2 * h)
        assert eval_weight_stack(heat_kernel, x, 0.3).dt == pytest.approx(fd, rel=1e-6)

    def test_laplacian(self, annulus):
        x = np.array([0.3, -0.2, 0.4])
        h = 1e-4
        center = _phi(annulus, x, 0.2)
        fd = 0.0
        for i in range(3):
            e = np.zeros(3)
            e[i] = h
            fd += (_phi(annulus, x + e, 0.2) - 2 * center + _phi(annulus, x - e, 0.2)) / h ** 2
        assert eval_weight_stack(annulus, x, 0.2).laplacian == pytest.approx(fd, rel=1e-5)

    def test_eta_definition(self, annulus):
        stack = eval_weight_stack(annulus, (0.3, 0.1, 0.2), 0.4)
        assert stack.eta == pytest.approx(0.5 * stack.dt + 0.25 * float(stack.grad @ stack.grad))

    def test_potential_adds_to_eta(self, annulus):
        x = (0.3, 0.1, 0.2)
        plain = eval_weight_stack(annulus, x, 0.4)
        with_mu = eval_weight_stack(annulus, x, 0.4, mu=0.1)
        assert with_mu.eta - plain.eta == pytest.approx(0.1 / 0.14)

    def test_singular_at_anchor(self, annulus):
        with pytest.raises(SingularPointError):
            eval_weight_stack(annulus, (0.0, 0.0, 0.0), 0.5)

    def test_potential_singular_at_origin(self):
        spec = WeightSpec(family="quadratic", x0=(0.1, 0.0, 0.0), T=1.0, hbar=0.1)
        with pytest.raises(SingularPointError):
            eval_weight_stack(spec, (0.0, 0.0, 0.0), 0.5, mu=0.1)

    def test_past_final_time(self, heat_kernel):
        with pytest.raises(InvalidInputError):
            eval_weight_stack(heat_kernel, (0.1, 0.1), 1.5)

    def test_dimension_mismatch(self, heat_kernel):
        with pytest.raises(InvalidInputError):
            eval_weight_stack(heat_kernel, (0.1,), 0.5)


class TestStackOnGrid:
    """Tests for stack_on_grid()."""

    def test_matches_pointwise(self, rectangle_domain):
        grid = build_grid(rectangle_domain, cells=16)
        spec = WeightSpec(family="heat_kernel", x0=rectangle_domain.x0, T=1.0, hbar=0.1, n=2)
        stack = stack_on_grid(spec, grid, 0.25)
        i, j = 3, 11
        point = eval_weight_stack(spec, (grid.axes[0][i], grid.axes[1][j]), 0.25)

        assert stack.phi[i, j] == pytest.approx(point.phi)
        assert stack.laplacian[i, j] == pytest.approx(point.laplacian)
        assert stack.eta[i, j] == pytest.approx(point.eta)

    def test_rate(self, interval_domain):
        grid = build_grid(interval_domain, cells=16)
        quadratic = WeightSpec(family="quadratic", x0=interval_domain.x0, T=1.0, hbar=0.1)
        zero = WeightSpec(family="zero", x0=interval_domain.x0, T=1.0, hbar=0.1)

        assert stack_on_grid(quadratic, grid, 0.0).rate == pytest.approx(1 / 1.1)
        assert stack_on_grid(zero, grid, 0.0).rate == 0.0

    def test_cached_per_grid_and_time(self, interval_domain):
        grid = build_grid(interval_domain, cells=16)
        spec = WeightSpec(family="quadratic", x0=interval_domain.x0, T=1.0, hbar=0.1)
        first = stack_on_grid(spec, grid, 0.5)

        assert stack_on_grid(spec, grid, 0.5) is first
        clear_cache()
        assert stack_on_grid(spec, grid, 0.5) is not first

    def test_singular_node_flagged(self, radial_domain):
        grid = build_grid(radial_domain, cells=16)
        spec = WeightSpec(family="radial_poly", x0=(0.0, 0.0, 0.0), T=1.0, hbar=0.1, n=3)
        stack = stack_on_grid(spec, grid, 0.5)

        # cell centres never hit the origin
        assert not stack.singular.any()

    def test_potential_needs_radial_grid(self, interval_domain):
        grid = build_grid(interval_domain, cells=16)
        spec = WeightSpec(family="quadratic", x0=interval_domain.x0, T=1.0, hbar=0.1)
        with pytest.raises(UnsupportedError):
            stack_on_grid(spec, grid, 0.5, mu=0.1)

    def test_potential_integrates_exactly(self, radial_domain):
        grid = build_grid(radial_domain, cells=16)
        spec = WeightSpec(family="quadratic", x0=(0.0, 0.0, 0.0), T=1.0, hbar=0.1, n=3)
        stack = stack_on_grid(spec, grid, 0.5, mu=0.2)

        # n = 3: ∫_ball 0.2/rho² = 0.2 * 4 pi R, split evenly over the cells
        cells = stack.potential * grid.weights
        np.testing.assert_allclose(cells, 0.2 * 4 * math.pi / 16, rtol=1e-12)

    def test_radial_grid_needs_origin_anchor(self, radial_domain):
        grid = build_grid(radial_domain, cells=16)
        spec = WeightSpec(family="quadratic", x0=(0.1, 0.0, 0.0), T=1.0, hbar=0.1)
        with pytest.raises(InvalidInputError):
            stack_on_grid(spec, grid, 0.5)


class TestWeightProfile:
    """Tests for weight_profile() and critical_radius()."""

    def test_touching_profile(self):
        report = weight_profile((0.25, 0.25, 1 / 16, 1.0), [0.25, 0.5, 1.0, 2.0])

        assert report.critical_radius == pytest.approx(0.5)
        assert report.supremum == pytest.approx(0.0, abs=1e-15)
        assert report.nonpositive
        assert report.decreasing_beyond_one

    def test_positive_bump(self):
        report = weight_profile((0.25, 0.25, 1 / 81, 4 / 3), [0.5, 1.0])

        assert report.critical_radius == pytest.approx((2 / 3) ** 1.5)
        assert report.supremum > 0
        assert not report.nonpositive

    def test_value_at_zero(self):
        report = weight_profile((0.25, 0.25, 0.1, 1.5), [1.0])
        assert report.value_at_zero == -0.1

    def test_no_critical_radius_without_b(self):
        assert critical_radius(0.25, 0.0, 1.5) is None

    def test_rejects_nonpositive_radii(self):
        with pytest.raises(InvalidInputError):
            weight_profile((0.25, 0.25, 0.1, 1.0), [0.0, 1.0])


class TestWeightGap:
    """Tests for weight_gap()."""

    def test_quadratic_closed_form(self):
        spec = WeightSpec(family="quadratic", x0=(0.0,), T=1.0, hbar=0.1)
        for R, delta in ((1.0, 1.0), (0.5, 0.25), (2.0, 0.5)):
            R0 = (1 + 2 * delta) * R
            assert weight_gap(spec, R, delta, R0) == pytest.approx(quadratic_gap(R, delta))
            assert quadratic_gap(R, delta) < 0

    def test_gap_formula(self):
        assert quadratic_gap(1.0, 1.0) == pytest.approx(-0.25 * 6.25 + 0.25 * 4)

    def test_zero_family_has_no_gap(self):
        spec = WeightSpec(family="zero", x0=(0.0,), T=1.0, hbar=0.1)
        assert weight_gap(spec, 1.0, 1.0, 3.0) == 0.0

    def test_outer_radius_too_small(self):
        spec = WeightSpec(family="quadratic", x0=(0.0,), T=1.0, hbar=0.1)
        with pytest.raises(InvalidInputError):
            weight_gap(spec, 1.0, 1.0, 2.0)

    def test_delta_range(self):
        spec = WeightSpec(family="quadratic", x0=(0.0,), T=1.0, hbar=0.1)
        with pytest.raises(InvalidInputError):
            weight_gap(spec, 1.0, 0.0, 3.0)
