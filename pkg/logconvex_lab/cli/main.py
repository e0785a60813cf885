"""Command-line interface for Logconvex Lab."""

import argparse
import os
import shutil
import sys
import time
from typing import List, Optional

from tqdm import tqdm

from logconvex_lab import __version__
from logconvex_lab.cli.experiments import CHECK_KINDS, CONSTANT_ALIASES, CONSTANT_KINDS, EXPERIMENTS
from logconvex_lab.core.errors import InvalidInputError, LabError
from logconvex_lab.core.logger import configure_logging, create_logger
from logconvex_lab.core.models import ReportDocument, RunConfig
from logconvex_lab.core.reports import REPORT_FILENAME, emit_plot_data, load_json, write_report
from logconvex_lab.core.utils import checkout_dir, normalize_path, resolve_jobs


# Program description
DESCRIPTION = """Logconvex Lab

Numerical checks of logarithmic convexity for the heat equation: the
frequency function and its Carleman commutator, three-time interpolation,
one-time observation and integrated observability, the spectral inequality
and the constant chains that connect them.

Every run reads an optional JSON config (--config), prints a short summary
and, with --out, writes report.json, CSV tables and run.log.

constants accepts theorem11, lemma41, lemmaA and lemma22 as alternate names
for chain, observability, spectral and decay-time.

Exit codes: 0 = pass or exploratory, 1 = an inequality failed,
2 = invalid configuration, numerical failure or I/O error.
"""

# Experiments that loop over seeds or candidates and get a progress bar
PROGRESS_EXPERIMENTS = {"search", "sweep"} | {f"check {kind}" for kind in CHECK_KINDS}


def create_progress_callback(desc: str = "Running"):
    """Create a tqdm-based progress callback.

    Args:
        desc: Description for progress bar.

    Returns:
        Tuple of (callback function, tqdm instance).
    """
    pbar = tqdm(total=100, desc=desc)

    # Leave room for the percentage, bar and counts
    terminal_width = shutil.get_terminal_size().columns
    max_desc_width = max(20, min(80, terminal_width - 40))

    def callback(current: int, total: int, message: str):
        pbar.total = total
        pbar.n = current
        if len(message) > max_desc_width:
            message = message[:max_desc_width - 3] + "..."
        pbar.set_description(message)
        pbar.refresh()

    return callback, pbar


def experiment_name(parsed: argparse.Namespace) -> str:
    """Registry key for the parsed subcommand, e.g. "check interpolation"."""
    if parsed.command == "constants":
        return f"constants {CONSTANT_ALIASES.get(parsed.kind, parsed.kind)}"
    if parsed.command == "check":
        return f"check {parsed.kind}"
    return parsed.command


def load_config(parsed: argparse.Namespace) -> RunConfig:
    """Config file merged with command-line overrides (flag > file > default).

    Raises:
        InvalidInputError: Missing or malformed config file.
    """
    data = {}
    if parsed.config:
        path = normalize_path(parsed.config)
        if not os.path.isfile(path):
            raise InvalidInputError(f"config file not found: {path}")
        data = load_json(path)
        if not isinstance(data, dict):
            raise InvalidInputError(f"{path} must contain a JSON object")

    for flag, key in (("seed", "seed"), ("grid", "grid"), ("tol", "tolerance")):
        value = getattr(parsed, flag)
        if value is not None:
            data[key] = value

    config = RunConfig.from_dict(data)
    if getattr(parsed, "reference", False):
        config.experiment = {**config.experiment, "reference": True}
    return config


def print_summary(document: ReportDocument, output_dir: Optional[str]) -> None:
    """Short human-readable result on stdout."""
    print(f"\n{document.experiment}: {document.verdict.upper()}")
    for key in ("min_slack", "failed_seeds", "oracle_deviation", "identity_gap", "gram_deviation"):
        if key in document.payload:
            print(f"  {key}: {document.payload[key]}")
    print(f"Time used: {document.elapsed_seconds} seconds")
    if output_dir:
        print(f"Report:\n  {os.path.join(output_dir, REPORT_FILENAME)}")


def run_experiment(experiment: str, config: RunConfig, jobs: int, out: Optional[str]) -> int:
    """Run one experiment, write its outputs and return the exit code.

    Args:
        experiment: Registry key (see EXPERIMENTS).
        config: Resolved configuration.
        jobs: Worker count for search and sweep.
        out: Output directory, or None to skip writing files.

    Returns:
        Exit code (0 pass/exploratory, 1 fail).
    """
    handler = EXPERIMENTS[experiment]
    output_dir = checkout_dir(normalize_path(out)) if out else None

    with create_logger(output_dir, experiment.replace(" ", "-")) as run_log:
        run_log.record("started", seed=config.seed, grid=config.grid, jobs=jobs)
        callback, pbar = (None, None)
        if experiment in PROGRESS_EXPERIMENTS:
            callback, pbar = create_progress_callback(experiment)

        start = time.perf_counter()
        try:
            outcome = handler(config, jobs, callback)
        except LabError as e:
            run_log.record("error", message=repr(str(e)))
            raise
        finally:
            if pbar is not None:
                pbar.close()
        elapsed = round(time.perf_counter() - start, 3)

        document = ReportDocument(
            experiment=experiment,
            config=config.to_dict(),
            verdict=outcome.verdict,
            payload=outcome.payload,
            version=__version__,
            elapsed_seconds=elapsed,
        )
        if output_dir:
            path = write_report(document, output_dir)
            run_log.record("report", path=path)
            for name, data in outcome.plots.items():
                if data is not None:
                    emit_plot_data(data, output_dir, name)
            run_log.record("tables", count=len(outcome.plots), names=",".join(sorted(outcome.plots)))
        run_log.verdict(outcome.verdict, elapsed)

    print_summary(document, output_dir)
    return document.exit_code


def _add_common_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--config",
        help="JSON config file (domain, weight, window, experiment, ...)",
        type=str,
        default=None
    )

    parser.add_argument(
        "--seed",
        help="Base seed for random initial data (default: config or 0)",
        type=int,
        default=None
    )

    parser.add_argument(
        "--out",
        help="Directory for report.json, CSV tables and run.log",
        type=str,
        default=None
    )

    parser.add_argument(
        "--grid",
        help="Grid cells per axis (default: config or 1024)",
        type=int,
        default=None
    )

    parser.add_argument(
        "--tol",
        help="Slack tolerance for pass/fail verdicts (default: config or 1e-6)",
        type=float,
        default=None
    )

    parser.add_argument(
        "--jobs",
        help="Worker threads for search and sweep (default: $LOGCONVEX_LAB_JOBS or 1)",
        type=int,
        default=None
    )

    parser.add_argument(
        "-v", "--verbose",
        help="Debug logging (default: warnings only)",
        action="store_true"
    )


def parse_args(args: Optional[List[str]] = None) -> argparse.Namespace:
    """Parse command-line arguments.

    Args:
        args: Arguments to parse (default: sys.argv[1:]).

    Returns:
        Parsed arguments namespace.
    """
    parser = argparse.ArgumentParser(
        description=DESCRIPTION,
        formatter_class=argparse.RawTextHelpFormatter
    )

    parser.add_argument(
        "-V", "--version",
        action="version",
        version=f"%(prog)s {__version__}"
    )

    common = argparse.ArgumentParser(add_help=False)
    _add_common_options(common)

    subparsers = parser.add_subparsers(dest="command", metavar="command")
    subparsers.required = True

    subparsers.add_parser("basis", parents=[common], help="Eigen-system summary")
    subparsers.add_parser("evolve", parents=[common], help="Norm trace of one seeded state")

    check = subparsers.add_parser("check", parents=[common], help="Run an inequality check")
    check.add_argument("kind", choices=CHECK_KINDS)

    certify = subparsers.add_parser("certify", parents=[common], help="Sign certificate of a radial weight")
    certify.add_argument(
        "--reference",
        help="Re-certify the reference parameter sets instead of experiment.params",
        action="store_true"
    )

    subparsers.add_parser("search", parents=[common], help="Scan weight parameters for certificates")

    constants = subparsers.add_parser("constants", parents=[common], help="Evaluate a constant chain")
    constants.add_argument("kind", choices=CONSTANT_KINDS + list(CONSTANT_ALIASES))

    subparsers.add_parser("sweep", parents=[common], help="Cartesian parameter sweep over one experiment")

    return parser.parse_args(args)


def main(args: Optional[List[str]] = None) -> int:
    """Main entry point for CLI.

    Args:
        args: Command-line arguments (default: sys.argv[1:]).

    Returns:
        Exit code (0 pass, 1 failed inequality, 2 error).
    """
    try:
        parsed = parse_args(args)
    except SystemExit as e:
        # --help/--version exit 0, usage errors exit 2
        return e.code if isinstance(e.code, int) else 2

    configure_logging(parsed.verbose)

    try:
        config = load_config(parsed)
        jobs = resolve_jobs(parsed.jobs)
        out = parsed.out or config.outputs.get("dir")
        return run_experiment(experiment_name(parsed), config, jobs, out)
    except (LabError, OSError) as e:
        print(f"Error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
