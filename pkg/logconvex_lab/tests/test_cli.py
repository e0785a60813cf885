"""Tests for logconvex_lab.cli.main module."""

import importlib
import os
from unittest.mock import MagicMock, patch

import orjson
import pytest

from logconvex_lab.cli.main import (
    PROGRESS_EXPERIMENTS,
    create_progress_callback,
    experiment_name,
    load_config,
    main,
    parse_args,
)
from logconvex_lab.core.errors import InvalidInputError

# logconvex_lab.cli re-exports main(), which shadows the submodule for dotted patch targets
cli_main_module = importlib.import_module("logconvex_lab.cli.main")


def write_config(directory, data, name="run.json"):
    path = os.path.join(directory, name)
    with open(path, "wb") as f:
        f.write(orjson.dumps(data))
    return path


class TestParseArgs:
    """Tests for parse_args() function."""

    def test_check_subcommand(self):
        args = parse_args(["check", "interpolation", "--seed", "3"])

        assert args.command == "check"
        assert args.kind == "interpolation"
        assert args.seed == 3

    def test_common_defaults(self):
        args = parse_args(["basis"])

        assert args.config is None
        assert args.out is None
        assert args.grid is None
        assert args.tol is None
        assert args.jobs is None
        assert args.verbose is False

    def test_certify_reference_flag(self):
        assert parse_args(["certify", "--reference"]).reference is True
        assert parse_args(["certify"]).reference is False

    def test_constants_kind(self):
        args = parse_args(["constants", "decay-time"])
        assert args.kind == "decay-time"

    @pytest.mark.parametrize("alias", ["theorem11", "lemma41", "lemmaA", "lemma22"])
    def test_constants_alias_is_accepted(self, alias):
        assert parse_args(["constants", alias]).kind == alias

    def test_version_flag_exits(self):
        """Verify --version flag exits with version info."""
        with pytest.raises(SystemExit) as exc_info:
            parse_args(["--version"])
        assert exc_info.value.code == 0

    def test_version_short_flag_exits(self):
        """Verify -V flag exits with version info."""
        with pytest.raises(SystemExit) as exc_info:
            parse_args(["-V"])
        assert exc_info.value.code == 0

    def test_command_required(self):
        with pytest.raises(SystemExit) as exc_info:
            parse_args([])
        assert exc_info.value.code == 2

    def test_unknown_check(self):
        with pytest.raises(SystemExit):
            parse_args(["check", "poincare"])


class TestExperimentName:
    """Tests for experiment_name()."""

    def test_grouped_commands(self):
        assert experiment_name(parse_args(["check", "hardy"])) == "check hardy"
        assert experiment_name(parse_args(["constants", "hbar"])) == "constants hbar"

    @pytest.mark.parametrize("alias, kind", [
        ("theorem11", "chain"),
        ("lemma41", "observability"),
        ("lemmaA", "spectral"),
        ("lemma22", "decay-time"),
    ])
    def test_constants_alias(self, alias, kind):
        assert experiment_name(parse_args(["constants", alias])) == f"constants {kind}"

    def test_plain_command(self):
        assert experiment_name(parse_args(["sweep"])) == "sweep"

    def test_progress_experiments(self):
        assert "check interpolation" in PROGRESS_EXPERIMENTS
        assert "search" in PROGRESS_EXPERIMENTS
        assert "basis" not in PROGRESS_EXPERIMENTS


class TestLoadConfig:
    """Tests for load_config()."""

    def test_flags_override_file(self, temp_dir):
        path = write_config(temp_dir, {"seed": 4, "grid": 128, "tolerance": 1e-3})
        config = load_config(parse_args(["basis", "--config", path, "--seed", "9", "--tol", "1e-8"]))

        assert config.seed == 9
        assert config.grid == 128
        assert config.tolerance == 1e-8

    def test_no_config_uses_defaults(self):
        config = load_config(parse_args(["basis"]))
        assert config.seed == 0

    def test_reference_flag_sets_experiment(self):
        config = load_config(parse_args(["certify", "--reference"]))
        assert config.experiment["reference"] is True

    def test_missing_file(self, temp_dir):
        with pytest.raises(InvalidInputError):
            load_config(parse_args(["basis", "--config", os.path.join(temp_dir, "nope.json")]))

    def test_non_object(self, temp_dir):
        path = write_config(temp_dir, [1, 2, 3])
        with pytest.raises(InvalidInputError):
            load_config(parse_args(["basis", "--config", path]))


class TestCreateProgressCallback:
    """Tests for create_progress_callback() function."""

    @patch.object(cli_main_module, "tqdm")
    def test_creates_callback_and_pbar(self, mock_tqdm):
        mock_pbar = MagicMock()
        mock_tqdm.return_value = mock_pbar

        callback, pbar = create_progress_callback("Testing")

        mock_tqdm.assert_called_once_with(total=100, desc="Testing")
        assert pbar == mock_pbar
        assert callable(callback)

    @patch.object(cli_main_module, "tqdm")
    def test_callback_updates_pbar(self, mock_tqdm):
        mock_pbar = MagicMock()
        mock_tqdm.return_value = mock_pbar

        callback, _ = create_progress_callback()
        callback(50, 200, "seed 3")

        assert mock_pbar.total == 200
        assert mock_pbar.n == 50
        mock_pbar.set_description.assert_called_with("seed 3")
        mock_pbar.refresh.assert_called()

    @patch.object(cli_main_module.shutil, "get_terminal_size")
    @patch.object(cli_main_module, "tqdm")
    def test_long_message_truncated(self, mock_tqdm, mock_size):
        mock_pbar = MagicMock()
        mock_tqdm.return_value = mock_pbar
        mock_size.return_value = os.terminal_size((60, 24))

        callback, _ = create_progress_callback()
        callback(1, 2, "x" * 100)

        description = mock_pbar.set_description.call_args[0][0]
        assert len(description) == 20
        assert description.endswith("...")


class TestMain:
    """Tests for main() exit codes and outputs."""

    @pytest.fixture
    def small_config(self, temp_dir):
        return write_config(temp_dir, {"modes": 8, "seeds": 2, "samples": 5})

    def test_version_returns_zero(self):
        assert main(["-V"]) == 0

    def test_usage_error_returns_two(self):
        assert main(["check", "poincare"]) == 2

    def test_missing_config_returns_two(self, temp_dir, capsys):
        code = main(["basis", "--config", os.path.join(temp_dir, "missing.json")])

        assert code == 2
        assert "Error:" in capsys.readouterr().err

    def test_invalid_config_returns_two(self, temp_dir):
        path = write_config(temp_dir, {"colour": "blue"})
        assert main(["basis", "--config", path]) == 2

    def test_basis_writes_outputs(self, temp_dir, small_config, capsys):
        out = os.path.join(temp_dir, "out")
        code = main(["basis", "--config", small_config, "--grid", "64", "--out", out])

        assert code == 0
        assert os.path.exists(os.path.join(out, "report.json"))
        assert os.path.exists(os.path.join(out, "basis.csv"))
        assert os.path.exists(os.path.join(out, "run.log"))
        assert "basis: PASS" in capsys.readouterr().out
        with open(os.path.join(out, "run.log"), encoding="utf-8") as f:
            lines = f.read().splitlines()
        assert " - basis started " in lines[0]
        assert " - basis verdict " in lines[-1] and "verdict=pass" in lines[-1]

    def test_report_contents(self, temp_dir, small_config):
        out = os.path.join(temp_dir, "out")
        main(["basis", "--config", small_config, "--grid", "64", "--out", out])

        with open(os.path.join(out, "report.json"), "rb") as f:
            report = orjson.loads(f.read())
        assert report["experiment"] == "basis"
        assert report["verdict"] == "pass"
        assert report["config"]["grid"] == 64
        assert report["payload"]["gram_deviation"] < 1e-10

    def test_without_out_writes_nothing(self, temp_dir, small_config):
        before = set(os.listdir(temp_dir))
        assert main(["basis", "--config", small_config, "--grid", "64"]) == 0
        assert set(os.listdir(temp_dir)) == before

    def test_certify_default_passes(self):
        assert main(["certify"]) == 0

    def test_certify_reference_passes(self):
        assert main(["certify", "--reference"]) == 0

    def test_uncertified_weight_fails(self, temp_dir):
        path = write_config(temp_dir, {"experiment": {"params": {"c": "1/8", "s": "1", "R0": 1}}})
        assert main(["certify", "--config", path]) == 1

    def test_hardy_on_interval_is_an_error(self, small_config):
        assert main(["check", "hardy", "--config", small_config, "--grid", "64"]) == 2

    def test_hbar_identity_passes(self, small_config, capsys):
        assert main(["constants", "hbar", "--config", small_config, "--grid", "64"]) == 0
        assert "identity_gap" in capsys.readouterr().out

    @pytest.mark.parametrize("alias", ["theorem11", "lemma41", "lemmaA", "lemma22"])
    def test_constants_alias_runs(self, alias, small_config):
        assert main(["constants", alias, "--config", small_config, "--grid", "64"]) == 0

    def test_telescoped_constant_by_alias(self, temp_dir):
        path = write_config(temp_dir, {"constants": {"beta": 0.5, "gamma": 1, "K": 1, "c": 2, "T": 1}})
        out = os.path.join(temp_dir, "out")

        assert main(["constants", "lemma41", "--config", path, "--out", out]) == 0
        with open(os.path.join(out, "report.json"), "rb") as f:
            report = orjson.loads(f.read())
        assert report["experiment"] == "constants observability"
        assert report["payload"]["chain"]["entries"]["C_beta"]["value"] == pytest.approx(13.348, rel=1e-4)

    def test_logconvexity_passes(self, small_config):
        assert main(["check", "logconvexity", "--config", small_config, "--grid", "64"]) == 0
