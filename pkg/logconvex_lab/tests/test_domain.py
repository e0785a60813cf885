"""Tests for logconvex_lab.core.domain module."""

import math

import mpmath
import numpy as np
import pytest

from logconvex_lab.core.domain import (
    build_basis,
    build_grid,
    build_interval_basis,
    build_radial_schrodinger_basis,
    build_rectangle_basis,
    eigenfunction_values,
    gram_matrix,
    integrate,
    inverse_square_weights,
    radial_form,
    region_weights,
    synthesize,
)
from logconvex_lab.core.errors import InvalidInputError, SupercriticalError
from logconvex_lab.core.models import Annulus, Box, DomainSpec, Field


class TestBuildGrid:
    """Tests for build_grid()."""

    def test_interval_nodes_include_boundary(self, interval_domain):
        grid = build_grid(interval_domain, cells=16)

        assert grid.shape == (17,)
        assert grid.axes[0][0] == 0.0
        assert grid.axes[0][-1] == pytest.approx(math.pi)
        assert grid.measure == pytest.approx(math.pi)

    def test_radial_cells_avoid_origin(self, radial_domain):
        grid = build_grid(radial_domain, cells=10)

        assert grid.axes[0][0] == pytest.approx(0.05)
        assert grid.measure == pytest.approx(4 * math.pi / 3)

    def test_simpson_needs_even_cells(self, interval_domain):
        with pytest.raises(InvalidInputError):
            build_grid(interval_domain, cells=9, rule="simpson")

    def test_too_few_cells(self, interval_domain):
        with pytest.raises(InvalidInputError):
            build_grid(interval_domain, cells=4)


class TestIntegrate:
    """Tests for integrate() and region weights."""

    def test_sine_squared(self, interval_domain):
        grid = build_grid(interval_domain, cells=256)
        field = Field(values=np.sin(grid.axes[0]) ** 2, grid=grid)
        assert integrate(field) == pytest.approx(math.pi / 2, rel=1e-12)

    def test_simpson_cubic_is_exact(self):
        domain = DomainSpec.from_dict({"kind": "interval", "extents": [2.0]})
        grid = build_grid(domain, cells=8, rule="simpson")
        field = Field(values=grid.axes[0] ** 3, grid=grid)
        assert integrate(field) == pytest.approx(4.0, rel=1e-13)

    def test_omega_measure(self, interval_domain):
        grid = build_grid(interval_domain, cells=100)
        ones = Field(values=np.ones(grid.shape), grid=grid)
        assert integrate(ones, "omega") == pytest.approx(1.0, rel=1e-12)

    def test_box_region_off_nodes(self, interval_domain):
        grid = build_grid(interval_domain, cells=100)
        ones = Field(values=np.ones(grid.shape), grid=grid)
        assert integrate(ones, Box(lower=(0.123,), upper=(0.789,))) == pytest.approx(0.666, rel=1e-12)

    def test_radial_shell(self, radial_domain):
        grid = build_grid(radial_domain, cells=50)
        ones = Field(values=np.ones(grid.shape), grid=grid)
        shell = Annulus(center=(0.0, 0.0, 0.0), r_inner=0.5, r_outer=1.0)
        assert integrate(ones, shell) == pytest.approx(4 * math.pi / 3 * (1 - 0.125), rel=1e-12)

    def test_radial_gaussian_against_mpmath(self, radial_domain):
        grid = build_grid(radial_domain, cells=400)
        field = Field(values=np.exp(-grid.axes[0] ** 2), grid=grid)
        with mpmath.workdps(30):
            exact = 4 * mpmath.pi * mpmath.quad(lambda r: r ** 2 * mpmath.exp(-r ** 2), [0, 1])
        assert integrate(field) == pytest.approx(float(exact), rel=1e-5)

    def test_radial_rejects_boxes(self, radial_domain):
        grid = build_grid(radial_domain, cells=50)
        with pytest.raises(InvalidInputError):
            region_weights(grid, Box(lower=(0, 0, 0), upper=(1, 1, 1)))

    def test_mask_shape_mismatch(self, interval_domain):
        grid = build_grid(interval_domain, cells=16)
        with pytest.raises(InvalidInputError):
            region_weights(grid, np.ones(5, dtype=bool))

    def test_missing_omega(self):
        grid = build_grid(DomainSpec.from_dict({"kind": "interval"}), cells=16)
        with pytest.raises(InvalidInputError):
            region_weights(grid, "omega")


class TestInverseSquareWeights:
    """Tests for the exact |x|^-2 shell integrals."""

    def test_cells_in_three_dimensions(self, radial_domain):
        grid = build_grid(radial_domain, cells=20)
        weights = inverse_square_weights(grid)

        np.testing.assert_allclose(weights, 4 * math.pi / 20, rtol=1e-12)

    def test_total_in_five_dimensions(self):
        grid = build_grid(DomainSpec.from_dict({"kind": "radial_ball", "n": 5, "extents": [2.0]}), cells=32)
        # |S^4| = 8 pi² / 3, ∫_0^2 rho² drho = 8/3
        total = float(np.sum(inverse_square_weights(grid)))
        assert total == pytest.approx(8 * math.pi ** 2 / 3 * 8 / 3, rel=1e-12)

    def test_needs_radial_grid(self, interval_domain):
        with pytest.raises(InvalidInputError):
            inverse_square_weights(build_grid(interval_domain, cells=16))


class TestSineBases:
    """Tests for the analytic interval and rectangle bases."""

    def test_interval_eigenvalues(self):
        system = build_interval_basis(math.pi, 5)
        np.testing.assert_allclose(system.eigenvalues, [1, 4, 9, 16, 25])

    def test_interval_gram_is_identity(self, interval_system):
        gram = gram_matrix(interval_system)
        np.testing.assert_allclose(gram, np.eye(interval_system.count), atol=1e-12)

    def test_rectangle_ordering(self):
        system = build_rectangle_basis(math.pi, math.pi, 4)

        np.testing.assert_allclose(system.eigenvalues, [2, 5, 5, 8])
        assert system.modes.tolist() == [[1, 1], [1, 2], [2, 1], [2, 2]]

    def test_rectangle_gram_is_identity(self, rectangle_system):
        gram = gram_matrix(rectangle_system)
        np.testing.assert_allclose(gram, np.eye(rectangle_system.count), atol=1e-12)

    def test_rectangle_synthesis_matches_tensor(self, rectangle_system):
        coefficients = np.linspace(1.0, 0.1, rectangle_system.count)
        direct = np.tensordot(coefficients, eigenfunction_values(rectangle_system), axes=(0, 0))
        np.testing.assert_allclose(synthesize(rectangle_system, coefficients), direct, atol=1e-12)

    def test_invalid_length(self):
        with pytest.raises(InvalidInputError):
            build_interval_basis(0.0, 4)

    def test_invalid_mode_count(self):
        with pytest.raises(InvalidInputError):
            build_interval_basis(1.0, 0)

    def test_wrong_grid_kind(self, interval_system, radial_domain):
        radial_grid = build_grid(radial_domain, cells=16)
        with pytest.raises(InvalidInputError):
            synthesize(interval_system, np.ones(interval_system.count), radial_grid)


class TestRadialBasis:
    """Tests for the radial Schrödinger basis."""

    def test_free_ball_eigenvalues(self, radial_system):
        # -Δ on the unit ball in R^3, radial modes: (j pi)²
        expected = (np.arange(1, 7) * math.pi) ** 2
        np.testing.assert_allclose(radial_system.eigenvalues, expected, rtol=2e-3)

    def test_profiles_are_orthonormal(self, radial_system):
        gram = gram_matrix(radial_system)
        np.testing.assert_allclose(gram, np.eye(radial_system.count), atol=1e-10)

    def test_first_profile_positive(self, radial_system):
        assert np.all(radial_system.profiles[0] > 0)

    def test_potential_lowers_ground_state(self):
        free = build_basis(DomainSpec.from_dict({"kind": "radial_ball", "n": 3, "extents": [1.0]}), 400, 3)
        attracted = build_basis(
            DomainSpec.from_dict({"kind": "radial_ball", "n": 3, "extents": [1.0], "mu": 0.2}), 400, 3
        )
        assert attracted.eigenvalues[0] < free.eigenvalues[0]
        assert attracted.eigenvalues[0] > 0

    def test_form_matches_eigenvalue(self, radial_system):
        grid = radial_system.grid
        form = radial_form(radial_system.profiles[1], grid, radial_system.mu)
        assert form == pytest.approx(radial_system.eigenvalues[1], rel=1e-10)

    def test_form_matches_eigenvalue_with_potential(self):
        domain = DomainSpec.from_dict({"kind": "radial_ball", "n": 3, "extents": [1.0], "mu": 7 / 54})
        system = build_basis(domain, 300, 3)

        for j in range(3):
            form = radial_form(system.profiles[j], system.grid, system.mu)
            assert form == pytest.approx(system.eigenvalues[j], rel=1e-10)

    @pytest.mark.parametrize("mu", [0.0, 7 / 54, 0.2])
    def test_ground_state_convergence_order(self, mu):
        # the ground state behaves like rho^(-1/2 + nu), nu = sqrt(1/4 - mu),
        # which caps the order at 2 nu
        domain = DomainSpec.from_dict({"kind": "radial_ball", "n": 3, "extents": [1.0], "mu": mu})
        ground = [build_basis(domain, cells, 1).eigenvalues[0] for cells in (100, 200, 400, 800)]
        diffs = np.abs(np.diff(ground))
        order = math.log2(diffs[1] / diffs[2])

        assert diffs[2] < diffs[1] < diffs[0]
        assert order >= 0.75 * min(2.0, 2 * math.sqrt(0.25 - mu))

    def test_supercritical(self, radial_domain):
        grid = build_grid(radial_domain, cells=32)
        with pytest.raises(SupercriticalError):
            build_radial_schrodinger_basis(3, 0.25, 1.0, grid, 4)

    def test_more_modes_than_cells(self, radial_domain):
        grid = build_grid(radial_domain, cells=16)
        with pytest.raises(InvalidInputError):
            build_radial_schrodinger_basis(3, 0.0, 1.0, grid, 17)

    def test_radius_mismatch(self, radial_domain):
        grid = build_grid(radial_domain, cells=16)
        with pytest.raises(InvalidInputError):
            build_radial_schrodinger_basis(3, 0.0, 2.0, grid, 4)

    def test_summary(self, radial_system):
        summary = radial_system.summary()

        assert summary["kind"] == "radial"
        assert summary["count"] == 6
        assert summary["normalization"] == "unit L2 norm in R^n"
