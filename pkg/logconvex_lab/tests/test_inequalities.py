"""Tests for logconvex_lab.core.inequalities module."""

import math

import numpy as np
import pytest

from logconvex_lab.core.constants import telescoped_observability
from logconvex_lab.core.domain import build_grid
from logconvex_lab.core.errors import InvalidInputError
from logconvex_lab.core.heat import random_state, sample, single_mode
from logconvex_lab.core.inequalities import (
    check_functional_inequality,
    check_integrated_observability,
    check_one_time_observation,
    check_spectral_inequality,
    measure_observation,
    observed_integral,
)
from logconvex_lab.core.models import ConstantChain, Field, ObservationReport
from logconvex_lab.core.utils import make_rng


def _chain(c=2.0, K=0.0, beta=0.5):
    chain = ConstantChain(name="manual")
    chain.add("c", c, "c", "test")
    chain.add("K", K, "K", "test")
    chain.add("beta", beta, "beta", "test")
    return chain


class TestHardy:
    """Tests for the Hardy inequality on radial grids."""

    @pytest.fixture
    def profile(self, radial_domain):
        grid = build_grid(radial_domain, cells=400)
        rho = grid.axes[0]
        return Field(values=1 - rho ** 2, grid=grid)

    def test_critical_constant_holds(self, profile):
        report = check_functional_inequality("hardy", profile, n=3)

        assert report.passed
        assert report.context["mu"] == pytest.approx(0.25)
        # per steradian: lhs = 2/15, rhs = 4/5
        assert report.lhs[0] / report.rhs[0] == pytest.approx((2 / 15) / (4 / 5), rel=1e-3)

    def test_ratio_converges_at_second_order(self, radial_domain):
        errors = []
        for cells in (100, 400):
            grid = build_grid(radial_domain, cells=cells)
            field = Field(values=1 - grid.axes[0] ** 2, grid=grid)
            report = check_functional_inequality("hardy", field, n=3)
            errors.append(abs(report.lhs[0] / report.rhs[0] - 1 / 6))

        assert errors[1] < 1e-4 / 6
        assert errors[1] < errors[0] / 10

    def test_large_mu_fails(self, profile):
        assert not check_functional_inequality("hardy", profile, n=3, mu=10.0).passed

    def test_needs_radial_grid(self, interval_system):
        field = sample(single_mode(interval_system, 1))
        with pytest.raises(InvalidInputError):
            check_functional_inequality("hardy", field, n=1)

    def test_dimension_mismatch(self, profile):
        with pytest.raises(InvalidInputError):
            check_functional_inequality("hardy", profile, n=4)


class TestNash:
    """Tests for the Nash inequality."""

    def test_sine_mode(self, interval_domain):
        grid = build_grid(interval_domain, cells=512)
        field = Field(values=np.sin(grid.axes[0]), grid=grid)
        report = check_functional_inequality("nash", field, n=1)

        assert report.passed
        assert report.context["l1"] == pytest.approx(2.0, rel=1e-5)
        assert report.context["l2"] == pytest.approx(math.sqrt(math.pi / 2), rel=1e-5)

    def test_unknown_kind(self, interval_system):
        field = sample(single_mode(interval_system, 1))
        with pytest.raises(InvalidInputError):
            check_functional_inequality("sobolev", field, n=1)


class TestOneTimeObservation:
    """Tests for measure_observation() and check_one_time_observation()."""

    def test_measurement_ordering(self, interval_system):
        state = random_state(interval_system, make_rng(1))
        report = measure_observation(state, 0.5)

        assert report.observed <= report.lhs <= report.total

    def test_nonpositive_time(self, interval_system):
        with pytest.raises(InvalidInputError):
            measure_observation(single_mode(interval_system, 1), 0.0)

    def test_passes_with_room(self):
        report = check_one_time_observation([ObservationReport(T=1.0, lhs=1.0, observed=0.5, total=2.0)], _chain())

        assert report.passed
        assert report.rhs[0] == pytest.approx(0.5 * math.log(2))

    def test_fails_with_weak_observation(self):
        report = check_one_time_observation([ObservationReport(T=1.0, lhs=1.0, observed=0.01, total=2.0)], _chain())
        assert not report.passed

    def test_zero_observation_fails(self):
        report = check_one_time_observation([ObservationReport(T=1.0, lhs=1.0, observed=0.0, total=2.0)], _chain())
        assert not report.passed

    def test_empty(self):
        with pytest.raises(InvalidInputError):
            check_one_time_observation([], _chain())


class TestIntegratedObservability:
    """Tests for observed_integral() and check_integrated_observability()."""

    def test_single_mode_integral(self, interval_system):
        state = single_mode(interval_system, 1)
        observed = measure_observation(state, 1e-9).observed

        # ||e^{-t} e_1||_omega integrates to (1 - e^{-1}) ||e_1||_omega
        assert observed_integral(state, 1.0) == pytest.approx(observed * (1 - math.exp(-1.0)), rel=1e-6)

    def test_telescoped_constant_holds(self, interval_system):
        states = [random_state(interval_system, make_rng(seed)) for seed in range(3)]
        chain = telescoped_observability(c=2, K=1, beta=0.5, gamma=1, p=2, T=1)
        report = check_integrated_observability(states, 1.0, chain)

        assert report.passed
        assert report.context["samples"] == 3

    def test_tiny_constant_fails(self, interval_system):
        chain = ConstantChain(name="manual")
        chain.add("constant", None, "e^-50", "test", log_value=-50.0)
        report = check_integrated_observability([single_mode(interval_system, 1)], 1.0, chain)
        assert not report.passed


class TestSpectralInequality:
    """Tests for check_spectral_inequality()."""

    def test_full_domain_is_parseval(self, interval_system):
        rng = make_rng(4)
        draws = [rng.standard_normal(interval_system.count) for _ in range(3)]
        report = check_spectral_inequality(interval_system, draws, lam=25.0, log_constant=0.0, region="all")

        assert report.passed
        assert report.context["modes"] == 5
        np.testing.assert_allclose(report.lhs, report.rhs, atol=1e-10)

    def test_omega_with_large_constant(self, interval_system):
        rng = make_rng(5)
        draws = [rng.standard_normal(interval_system.count) for _ in range(3)]
        assert check_spectral_inequality(interval_system, draws, lam=100.0, log_constant=50.0).passed

    def test_omega_without_constant_fails(self, interval_system):
        draws = [np.ones(interval_system.count)]
        assert not check_spectral_inequality(interval_system, draws, lam=100.0, log_constant=0.0).passed

    def test_cut_below_spectrum(self, interval_system):
        with pytest.raises(InvalidInputError):
            check_spectral_inequality(interval_system, [np.ones(interval_system.count)], lam=0.5, log_constant=0.0)
