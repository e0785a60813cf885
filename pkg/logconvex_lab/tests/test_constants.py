"""Tests for logconvex_lab.core.constants module."""

import math

import pytest

from logconvex_lab.core.constants import (
    hbar_selection,
    interpolation_exponent_ell,
    localized_observation_constants,
    observation_chain,
    observation_from_spectral,
    regional_decay_time,
    spectral_from_observation,
    telescoped_observability,
)
from logconvex_lab.core.errors import InvalidInputError
from logconvex_lab.core.models import WeightSpec


class TestTelescopedObservability:
    """Tests for telescoped_observability()."""

    def test_reference_values(self):
        chain = telescoped_observability(c=2, K=1, beta=0.5, gamma=1, p=2, T=1)
        z = math.sqrt(1.5)
        C_beta = 1.5 / (0.5 * (z - 1))

        assert chain.value("z") == pytest.approx(z)
        assert chain.value("C_beta") == pytest.approx(C_beta)
        assert chain.value("C_beta") == pytest.approx(13.348, abs=1e-3)
        assert chain.log("constant") == pytest.approx(math.log(2) + 2 * C_beta - math.log(z))

    def test_z_factor(self):
        chain = telescoped_observability(c=2, K=1, beta=0.5, gamma=1, p=2, T=1)
        gap = chain.log("constant_without_z") - chain.log("constant")
        assert gap == pytest.approx(0.5 * math.log(1.5))

    def test_longer_window_is_cheaper(self):
        short = telescoped_observability(c=2, K=1, beta=0.5, gamma=1, p=2, T=0.5)
        long = telescoped_observability(c=2, K=1, beta=0.5, gamma=1, p=2, T=2.0)
        assert long.log("constant") < short.log("constant")

    def test_huge_constant_kept_in_log_space(self):
        chain = telescoped_observability(c=2, K=100, beta=0.5, gamma=1, p=2, T=0.01)

        assert chain["constant"].value is None
        assert chain.log("constant") > 700

    def test_beta_range(self):
        with pytest.raises(InvalidInputError):
            telescoped_observability(c=2, K=1, beta=1.0, gamma=1, p=2, T=1)

    def test_p_range(self):
        with pytest.raises(InvalidInputError):
            telescoped_observability(c=2, K=1, beta=0.5, gamma=1, p=3, T=1)

    def test_positive_inputs(self):
        with pytest.raises(InvalidInputError):
            telescoped_observability(c=2, K=0, beta=0.5, gamma=1, p=2, T=1)


class TestSpectralChains:
    """Tests for spectral_from_observation() and observation_from_spectral()."""

    def test_spectral_from_observation(self):
        chain = spectral_from_observation(c=2, K=1, beta=0.5, gamma=1, p=2, lam=4)

        assert chain.value("T_opt") == pytest.approx(0.5)
        assert chain.value("exponent") == pytest.approx(4.0)
        assert chain.log("constant") == pytest.approx(math.log(2) + 4.0)

    def test_exponent_grows_like_sqrt_lambda(self):
        low = spectral_from_observation(c=2, K=1, beta=0.5, gamma=1, p=2, lam=4)
        high = spectral_from_observation(c=2, K=1, beta=0.5, gamma=1, p=2, lam=16)
        assert high.value("exponent") == pytest.approx(2 * low.value("exponent"))

    def test_converse(self):
        chain = observation_from_spectral(D1=1, D2=2, gamma=1, beta=0.5, p=2, measure_omega=1)

        assert chain.value("D3") == pytest.approx(4.0)
        assert chain.value("D4") == pytest.approx(8.0)

    def test_converse_large_omega(self):
        chain = observation_from_spectral(D1=1, D2=2, gamma=1, beta=0.5, p=1, measure_omega=4)
        assert chain.value("D3") == pytest.approx(6.0)


class TestDecayTime:
    """Tests for regional_decay_time()."""

    def test_reference_values(self):
        chain = regional_decay_time(1.0, 0.5, R=1.0, delta=1.0, T=1.0)
        theta = 1.0 / (2 * (2 * math.log(2) + 2))

        assert chain.value("theta") == pytest.approx(theta)
        assert chain.value("epsilon") == pytest.approx(theta)
        assert chain.value("C_delta_R") == pytest.approx(0.5)
        assert chain.value("log_ball_ratio_bound") == pytest.approx(1.0 / theta)

    def test_epsilon_scales_with_delta(self):
        chain = regional_decay_time(1.0, 0.5, R=1.0, delta=0.5, T=1.0)
        assert chain.value("epsilon") == pytest.approx(chain.value("theta") / 0.5)

    def test_growing_solution(self):
        with pytest.raises(InvalidInputError):
            regional_decay_time(0.5, 1.0, R=1.0, delta=1.0, T=1.0)

    def test_delta_range(self):
        with pytest.raises(InvalidInputError):
            regional_decay_time(1.0, 0.5, R=1.0, delta=2.0, T=1.0)


class TestObservationChain:
    """Tests for observation_chain()."""

    def test_internal_relations(self):
        chain = observation_chain(r=0.5, R=1.0, epsilon=0.5)
        ell = chain.value("ell")
        M = chain.value("M_ell")

        assert M == pytest.approx(float(interpolation_exponent_ell(ell)))
        assert chain.value("K") == pytest.approx(0.25 * ell / 8)
        assert chain.value("beta") == pytest.approx(1 / (2 * (1 + M)))
        assert chain.value("chain_gap") > 0

    def test_ell_formula(self):
        chain = observation_chain(r=0.5, R=1.0, epsilon=0.5)
        expected = (4 * 2 ** 2.5 / (0.5 * math.log(1.5))) ** 2
        assert chain.value("ell") == pytest.approx(expected, rel=1e-10)

    def test_spectral_extension(self):
        chain = observation_chain(r=0.5, R=1.0, epsilon=0.5, lam=100.0)
        M, K = chain.value("M_ell"), chain.value("K")

        assert chain.value("spectral_exponent") == pytest.approx(4 * math.sqrt(100 * (1 + 2 * M) * K))
        assert chain.log("spectral_constant") == pytest.approx(math.log(4) + chain.value("spectral_exponent"))

    def test_radius_order(self):
        with pytest.raises(InvalidInputError):
            observation_chain(r=1.0, R=1.0, epsilon=0.5)

    def test_epsilon_range(self):
        with pytest.raises(InvalidInputError):
            observation_chain(r=0.5, R=1.0, epsilon=1.0)


class TestInterpolationExponentEll:
    """Tests for interpolation_exponent_ell()."""

    def test_value(self):
        assert float(interpolation_exponent_ell(2)) == pytest.approx(math.log(3) / math.log(5 / 3))

    def test_increasing(self):
        values = [float(interpolation_exponent_ell(ell)) for ell in (1, 2, 4, 8)]
        assert values == sorted(values)


class TestLocalizedConstants:
    """Tests for localized_observation_constants()."""

    def test_quadratic_weight(self):
        weight = WeightSpec(family="quadratic", x0=(0.0,), T=1.0, hbar=0.1)
        chain = localized_observation_constants(weight, R=1.0, delta=1.0, R0=3.0, ell=2.0, theta=0.1)

        assert chain.value("gap") == pytest.approx(0.5625)
        assert chain.value("C_ell_phi") == pytest.approx(0.05625)
        assert chain.value("C3") == pytest.approx(0.05625)
        assert chain.value("hbar_max") == pytest.approx(0.005625)

    def test_long_window_caps_C3(self):
        weight = WeightSpec(family="quadratic", x0=(0.0,), T=1.0, hbar=0.1)
        chain = localized_observation_constants(weight, R=1.0, delta=1.0, R0=3.0, ell=0.01)
        assert chain.value("C3") == pytest.approx(min(0.5625 / (1.02 * 2), 50.0))

    def test_zero_weight_does_not_localize(self):
        weight = WeightSpec(family="zero", x0=(0.0,), T=1.0, hbar=0.1)
        with pytest.raises(InvalidInputError):
            localized_observation_constants(weight, R=1.0, delta=1.0, R0=3.0, ell=2.0)


class TestHbarSelection:
    """Tests for hbar_selection()."""

    def test_identity(self):
        chain = hbar_selection(C1=1.0, C2=2.0, ell=2.0, T=1.0, norm_u0=3.0, norm_uT=1.0)
        assert chain.log("log_direct") == pytest.approx(chain.log("log_closed_form"), rel=1e-12)

    def test_hbar_formula(self):
        chain = hbar_selection(C1=1.0, C2=2.0, ell=2.0, T=1.0, norm_u0=3.0, norm_uT=1.0, M=1.0)
        expected = 2.0 / (math.log(2) + 8.0 + 2 * math.log(3))

        assert chain.value("hbar") == pytest.approx(expected)
        assert chain.value("exponent") == pytest.approx(1.0 + 2 * 0.5)

    def test_growing_norm(self):
        with pytest.raises(InvalidInputError):
            hbar_selection(C1=1.0, C2=2.0, ell=2.0, T=1.0, norm_u0=1.0, norm_uT=3.0)
