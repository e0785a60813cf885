"""JSON reports and CSV plot data.

Reports are written atomically (temp file in the target directory, then
os.replace) so an interrupted run never leaves a half-written report.
"""

import csv
import dataclasses
import json
import logging
import math
import os
import tempfile
from fractions import Fraction
from typing import Any, Dict, List, Sequence, Union

import numpy as np

# Use orjson for faster JSON handling if available
try:
    import orjson
    _USE_ORJSON = True
except ImportError:
    _USE_ORJSON = False

from logconvex_lab.core.errors import InvalidInputError
from logconvex_lab.core.models import (
    EvolutionTrace,
    FrequencyTrace,
    InequalityReport,
    ReportDocument,
)

logger = logging.getLogger(__name__)

REPORT_FILENAME = "report.json"
_TMP_PREFIX = ".report_"


def to_jsonable(value: Any) -> Any:
    """Convert models, numpy values and Fractions into plain JSON types.

    Non-finite floats become None so both JSON backends produce the same
    bytes.
    """
    if value is None or isinstance(value, (bool, str)):
        return value
    if isinstance(value, Fraction):
        return str(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else None
    if isinstance(value, np.ndarray):
        return [to_jsonable(v) for v in value.tolist()]
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple, set, frozenset)):
        items = sorted(value) if isinstance(value, (set, frozenset)) else value
        return [to_jsonable(v) for v in items]
    to_dict = getattr(value, "to_dict", None)
    if callable(to_dict):
        return to_jsonable(to_dict())
    if dataclasses.is_dataclass(value):
        return {
            f.name: to_jsonable(getattr(value, f.name))
            for f in dataclasses.fields(value)
        }
    raise InvalidInputError(f"cannot serialize {type(value).__name__}")


def dumps(data: Any) -> bytes:
    """Deterministic JSON bytes: sorted keys, two-space indent."""
    plain = to_jsonable(data)
    if _USE_ORJSON:
        return orjson.dumps(
            plain,
            option=orjson.OPT_INDENT_2 | orjson.OPT_SORT_KEYS | orjson.OPT_SERIALIZE_NUMPY,
        )
    return json.dumps(plain, indent=2, sort_keys=True).encode("utf-8")


def load_json(path: str) -> Any:
    """Read a JSON document (config or fitting input).

    Raises:
        OSError: If the file cannot be read.
        InvalidInputError: If the content is not valid JSON.
    """
    with open(path, "rb") as f:
        raw = f.read()
    try:
        if _USE_ORJSON:
            return orjson.loads(raw)
        return json.loads(raw.decode("utf-8"))
    except ValueError as e:
        raise InvalidInputError(f"{path} is not valid JSON: {e}") from None


def _cleanup_temp_files(output_dir: str) -> None:
    """Remove orphaned temp files from interrupted report writes."""
    try:
        for f in os.listdir(output_dir):
            if f.startswith(_TMP_PREFIX) and f.endswith(".tmp"):
                try:
                    os.unlink(os.path.join(output_dir, f))
                except OSError:
                    pass
    except OSError:
        pass


def write_json(data: Any, output_dir: str, filename: str = REPORT_FILENAME) -> str:
    """Write JSON atomically into output_dir.

    Args:
        data: Anything to_jsonable accepts.
        output_dir: Target directory, created if missing.
        filename: Target file name.

    Returns:
        Path of the written file.

    Raises:
        OSError: If the directory or file cannot be written.
    """
    os.makedirs(output_dir, exist_ok=True)
    _cleanup_temp_files(output_dir)
    target = os.path.join(output_dir, filename)
    payload = dumps(data)

    fd, tmp_path = tempfile.mkstemp(dir=output_dir, suffix=".tmp", prefix=_TMP_PREFIX)
    try:
        with open(fd, "wb") as f:
            f.write(payload)
        os.replace(tmp_path, target)
    except BaseException:
        try:
            os.unlink(tmp_path)
        except OSError:
            pass
        raise
    logger.debug(f"Wrote {target}")
    return target


def write_report(document: ReportDocument, output_dir: str, filename: str = REPORT_FILENAME) -> str:
    """Write a ReportDocument to output_dir/report.json."""
    return write_json(document.to_dict(), output_dir, filename)


PlotData = Union[FrequencyTrace, EvolutionTrace, InequalityReport, Sequence[Dict[str, Any]]]


def _table(data: PlotData) -> tuple:
    if isinstance(data, (FrequencyTrace, EvolutionTrace)):
        return list(data.COLUMNS), data.rows()
    if isinstance(data, InequalityReport):
        rows = list(zip(range(len(data.slack)), data.lhs, data.rhs, data.slack))
        return ["index", "lhs", "rhs", "slack"], rows
    records = list(data)
    if not records:
        return [], []
    header: List[str] = []
    for record in records:
        for key in record:
            if key not in header:
                header.append(key)
    return header, [tuple(record.get(k, "") for k in header) for record in records]


def _cell(value: Any) -> Any:
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, (list, tuple, dict)):
        if _USE_ORJSON:
            return orjson.dumps(to_jsonable(value), option=orjson.OPT_SORT_KEYS).decode("utf-8")
        return json.dumps(to_jsonable(value), sort_keys=True, separators=(",", ":"))
    return value


def emit_plot_data(data: PlotData, output_dir: str, name: str) -> str:
    """Write a trace or report as a CSV file with a header row.

    An empty trace produces a header-only file.

    Args:
        data: FrequencyTrace, EvolutionTrace, InequalityReport, or a list of
            flat records (sweep summaries).
        output_dir: Target directory, created if missing.
        name: File stem; the file is ``<name>.csv``.

    Returns:
        Path of the written CSV.

    Raises:
        OSError: If the path is not writable.
    """
    header, rows = _table(data)
    os.makedirs(output_dir, exist_ok=True)
    path = os.path.join(output_dir, f"{name}.csv")
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f)
        if header:
            writer.writerow(header)
        for row in rows:
            writer.writerow([_cell(v) for v in row])
    logger.debug(f"Wrote {len(rows)} rows to {path}")
    return path


def read_plot_data(path: str) -> List[Dict[str, str]]:
    """Read a CSV written by emit_plot_data back as dict rows."""
    with open(path, "r", encoding="utf-8", newline="") as f:
        return list(csv.DictReader(f))


def sweep_file_stem(experiment: str, point: Dict[str, Any]) -> str:
    """Deterministic CSV stem for one sweep point, e.g. ``interpolation_ell-2``."""
    parts = [experiment]
    for key in sorted(point):
        value = point[key]
        if isinstance(value, float) and value.is_integer():
            value = int(value)
        parts.append(f"{key}-{value}")
    return "_".join(str(p).replace("/", "_") for p in parts)

