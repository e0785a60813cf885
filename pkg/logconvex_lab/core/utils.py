"""Utility functions for paths, worker counts and seeded randomness."""

import os
import sys
from typing import Optional

import numpy as np

from logconvex_lab.core.errors import InvalidInputError

# Windows MAX_PATH limit (260 chars including null terminator)
_WIN_MAX_PATH = 260

JOBS_ENV_VAR = "LOGCONVEX_LAB_JOBS"


def normalize_path(path: str) -> str:
    """Normalize a path for consistent handling.

    Expands ``~``, strips whitespace and normalizes separators. On Windows,
    paths at or above MAX_PATH get the ``\\\\?\\`` extended-length prefix.

    Args:
        path: Path to normalize.

    Returns:
        Normalized path.
    """
    result = os.path.normpath(os.path.expanduser(path.strip()))

    if sys.platform == "win32" and len(result) >= _WIN_MAX_PATH:
        # \\?\ prefix requires an absolute path with no relative segments
        result = os.path.abspath(result)
        if not result.startswith("\\\\?\\"):
            result = "\\\\?\\" + result

    return result


def checkout_dir(path: str) -> str:
    """Ensure an output directory exists, creating it if necessary.

    Args:
        path: Directory path.

    Returns:
        The directory path.

    Raises:
        InvalidInputError: If path exists as a file.
    """
    if os.path.isfile(path):
        raise InvalidInputError(f"Cannot create directory: {path} exists as a file")
    os.makedirs(path, exist_ok=True)
    return path


def resolve_jobs(jobs: Optional[int] = None) -> int:
    """Worker count: explicit value, then LOGCONVEX_LAB_JOBS, then 1.

    Args:
        jobs: Value of ``--jobs`` if given.

    Returns:
        A positive worker count.

    Raises:
        InvalidInputError: If the resolved value is not a positive integer.
    """
    if jobs is None:
        raw = os.environ.get(JOBS_ENV_VAR, "").strip()
        if not raw:
            return 1
        try:
            jobs = int(raw)
        except ValueError:
            raise InvalidInputError(f"{JOBS_ENV_VAR} must be an integer, got {raw!r}") from None
    if jobs < 1:
        raise InvalidInputError(f"jobs must be >= 1, got {jobs}")
    return jobs


def make_rng(seed: int) -> np.random.Generator:
    """Seeded generator; seeds are always explicit."""
    if seed < 0:
        raise InvalidInputError("seed must be a nonnegative integer")
    return np.random.default_rng(seed)


def smooth_coefficients(rng: np.random.Generator, count: int, decay: float = 1.0) -> np.ndarray:
    """Random coefficients a_j ~ N(0, 1) / j**decay, j = 1..count."""
    j = np.arange(1, count + 1, dtype=float)
    return rng.standard_normal(count) / j ** decay
