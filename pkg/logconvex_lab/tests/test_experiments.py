"""Tests for logconvex_lab.cli.experiments module."""

import pytest

from logconvex_lab.cli.experiments import (
    CHECK_KINDS,
    CONSTANT_KINDS,
    EXPERIMENTS,
    override,
    run_check_hardy,
    run_check_nash,
    run_check_observation,
    run_check_spectral,
    run_constants_chain,
    run_constants_converse,
    run_constants_decay_time,
    run_evolve,
    run_search,
)
from logconvex_lab.core.errors import InvalidInputError
from logconvex_lab.core.models import EvolutionTrace, RunConfig

RADIAL = {"kind": "radial_ball", "n": 3, "extents": [1.0]}


def small(**extra):
    data = {"grid": 64, "modes": 8, "seeds": 2, "samples": 5}
    data.update(extra)
    return RunConfig.from_dict(data)


class TestRegistry:
    """Tests for the experiment registry."""

    def test_kinds(self):
        assert set(CHECK_KINDS) == {
            "logconvexity", "diffineq", "interpolation", "observation",
            "observability", "spectral", "hardy", "nash",
        }
        assert set(CONSTANT_KINDS) == {"chain", "observability", "spectral", "converse", "decay-time", "hbar"}

    def test_every_handler_callable(self):
        assert all(callable(handler) for handler in EXPERIMENTS.values())


class TestOverride:
    """Tests for override()."""

    def test_dotted_key(self):
        config = override(small(), {"window.ell": 4})

        assert config.window["ell"] == 4
        assert config.window["T"] == 1.0

    def test_top_level_key(self):
        assert override(small(), {"seed": 5}).seed == 5

    def test_original_untouched(self):
        config = small()
        override(config, {"window.ell": 4})
        assert config.window["ell"] == 2.0

    def test_key_through_a_scalar(self):
        with pytest.raises(InvalidInputError):
            override(small(), {"seed.value": 1})


class TestHandlers:
    """Handlers return an outcome without touching the disk."""

    def test_evolve_is_exploratory(self):
        outcome = run_evolve(small(), 1)

        assert outcome.verdict == "exploratory"
        assert isinstance(outcome.plots["evolve"], EvolutionTrace)
        assert outcome.payload["l2_final"] < outcome.payload["l2_initial"]

    def test_nash_passes(self):
        outcome = run_check_nash(small(), 1)

        assert outcome.verdict == "pass"
        assert len(outcome.plots["nash"]) == 2

    def test_hardy_on_radial_ball(self):
        outcome = run_check_hardy(small(domain=RADIAL), 1)

        assert outcome.verdict == "pass"
        assert outcome.payload["mu"] == pytest.approx(0.25)
        assert outcome.plots["hardy"][0]["field"] == "envelope"

    def test_supercritical_hardy_is_exploratory(self):
        outcome = run_check_hardy(small(domain=RADIAL, experiment={"mu": 5}), 1)
        assert outcome.verdict == "exploratory"

    def test_observation_passes(self):
        outcome = run_check_observation(small(), 1)

        assert outcome.verdict == "pass"
        assert outcome.payload["reports"] == 6

    def test_observation_rejects_nonpositive_times(self):
        with pytest.raises(InvalidInputError):
            run_check_observation(small(experiment={"times": [0.0, 0.5]}), 1)

    def test_spectral_passes(self):
        outcome = run_check_spectral(small(), 1)

        assert outcome.verdict == "pass"
        assert outcome.payload["lambda"] == pytest.approx(64.0)

    def test_progress_is_reported(self):
        calls = []
        run_check_nash(small(), 1, lambda current, total, message: calls.append((current, total)))
        assert calls == [(1, 2), (2, 2)]

    def test_seeds_must_be_positive(self):
        with pytest.raises(InvalidInputError):
            run_check_nash(small(seeds=0), 1)


class TestConstantHandlers:
    """Tests for the constants handlers."""

    def test_chain_rows(self):
        outcome = run_constants_chain(small(), 1)
        names = [row["name"] for row in outcome.plots["chain"]]

        assert "K_eps" in names
        assert outcome.verdict == "pass"

    def test_converse_uses_omega_measure(self):
        outcome = run_constants_converse(small(constants={"D1": 1, "D2": 2}), 1)
        # |omega| = 1 and p = 2 give D3 = 2(1 + D1)
        assert outcome.payload["chain"].value("D3") == pytest.approx(4.0)

    def test_decay_time_from_norms(self):
        config = small(constants={"norm_u0_sq": 1.0, "norm_uT_ball_sq": 0.5, "R": 1.0, "delta": 1.0})
        outcome = run_constants_decay_time(config, 1)
        assert outcome.payload["chain"].value("C_delta_R") == pytest.approx(0.5)

    def test_decay_time_localized(self):
        config = small(constants={
            "norm_u0_sq": 1.0, "norm_uT_ball_sq": 0.5, "R": 0.4, "delta": 1.0, "localized": True,
        })
        outcome = run_constants_decay_time(config, 1)
        assert outcome.payload["localized"].value("C3") > 0


class TestSearchHandler:
    """Tests for run_search()."""

    def test_small_scan(self):
        config = small(search={"ranges": {"b": ["1/4"], "c": ["1/16", "1/8"], "s": ["1"]}})
        outcome = run_search(config, 1)

        assert outcome.verdict == "exploratory"
        assert outcome.plots["search"] == [{"a": 0.25, "b": 0.25, "c": 0.0625, "s": 1.0}]
