"""Run logs for logconvex_lab experiments.

A run log is a plain text file, ``run.log``, next to report.json. Each line
is one stage record of one experiment:

    2025-01-01 12:00:00 - certify started grid=1024 jobs=1 seed=0
    2025-01-01 12:00:02 - certify verdict elapsed_s=1.912 verdict=pass
"""

import logging
import os
import time
from typing import Any, Dict, List, Optional, Union

logger = logging.getLogger(__name__)

RUN_LOG_FILENAME = "run.log"


def format_fields(fields: Dict[str, Any]) -> str:
    """``key=value`` pairs in sorted key order; floats use repr."""
    parts = []
    for key in sorted(fields):
        value = fields[key]
        if isinstance(value, float):
            value = repr(value)
        parts.append(f"{key}={value}")
    return " ".join(parts)


class RunLogger:
    """Stage records of one experiment, appended to run.log in batches.

    Usage:
        with RunLogger("/path/to/out", "certify") as run_log:
            run_log.record("started", seed=0, grid=1024)
            run_log.verdict("pass", elapsed=1.9)
    """

    # Records held in memory before an append
    DEFAULT_BUFFER_SIZE = 20

    def __init__(self, output_dir: str, experiment: str = "run", buffer_size: int = DEFAULT_BUFFER_SIZE):
        self.output_dir = output_dir
        self.experiment = experiment
        self.filepath = os.path.join(output_dir, RUN_LOG_FILENAME)
        self.written = 0
        self._pending: List[str] = []
        self._buffer_size = buffer_size

    def log(self, message: str) -> None:
        """Queue one free-form timestamped line."""
        self._pending.append(f"{time.strftime('%Y-%m-%d %H:%M:%S')} - {message}\n")
        if len(self._pending) >= self._buffer_size:
            self.flush()

    def record(self, event: str, **fields: Any) -> None:
        """Queue a stage record ``<experiment> <event> key=value ...``."""
        line = f"{self.experiment} {event}"
        if fields:
            line += " " + format_fields(fields)
        self.log(line)

    def verdict(self, verdict: str, elapsed: float, **fields: Any) -> None:
        """Queue the closing record of a run."""
        self.record("verdict", verdict=verdict, elapsed_s=elapsed, **fields)

    def flush(self) -> None:
        """Append queued records to run.log.

        On I/O failure the queue is dropped with a warning. The experiment
        keeps running.
        """
        if not self._pending:
            return
        try:
            os.makedirs(self.output_dir, exist_ok=True)
            with open(self.filepath, "a", encoding="utf-8") as f:
                f.writelines(self._pending)
            self.written += len(self._pending)
        except OSError as e:
            logger.warning(f"run log flush failed ({e}), discarding {len(self._pending)} entries")
        finally:
            self._pending.clear()

    @property
    def pending(self) -> int:
        return len(self._pending)

    def close(self) -> None:
        self.flush()

    def __enter__(self) -> "RunLogger":
        return self

    def __exit__(self, exc_type, exc_val, exc_tb) -> None:
        if exc_type is not None:
            self.record("aborted", error=exc_type.__name__)
        self.close()


class NullLogger:
    """Stands in for RunLogger when no output directory is given."""

    written = 0
    pending = 0

    def log(self, message: str) -> None:
        pass

    def record(self, event: str, **fields: Any) -> None:
        pass

    def verdict(self, verdict: str, elapsed: float, **fields: Any) -> None:
        pass

    def flush(self) -> None:
        pass

    def close(self) -> None:
        pass

    def __enter__(self) -> "NullLogger":
        return self

    def __exit__(self, exc_type, exc_val, exc_tb) -> None:
        pass


def create_logger(output_dir: Optional[str], experiment: str = "run") -> Union[RunLogger, NullLogger]:
    """RunLogger for ``output_dir``, or a NullLogger when it is None."""
    if output_dir:
        return RunLogger(output_dir, experiment)
    return NullLogger()


def configure_logging(verbose: bool = False) -> None:
    """Set the root logging level for a CLI run."""
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
        force=True,
    )
