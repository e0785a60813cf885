"""Tests for logconvex_lab.core.reports module."""

import math
import os
from fractions import Fraction

import numpy as np
import pytest

from logconvex_lab.core.errors import InvalidInputError
from logconvex_lab.core.models import (
    Box,
    EvolutionTrace,
    FrequencyTrace,
    InequalityReport,
    ReportDocument,
)
from logconvex_lab.core.reports import (
    dumps,
    emit_plot_data,
    load_json,
    read_plot_data,
    sweep_file_stem,
    to_jsonable,
    write_json,
    write_report,
)


class TestToJsonable:
    """Tests for to_jsonable() conversion."""

    def test_fraction_becomes_string(self):
        assert to_jsonable(Fraction(1, 81)) == "1/81"

    def test_numpy_values(self):
        assert to_jsonable(np.float64(0.5)) == 0.5
        assert to_jsonable(np.int64(3)) == 3
        assert to_jsonable(np.array([1.0, 2.0])) == [1.0, 2.0]

    def test_non_finite_becomes_none(self):
        assert to_jsonable([math.inf, -math.inf, math.nan]) == [None, None, None]

    def test_dataclass_uses_to_dict(self):
        assert to_jsonable(Box(lower=(0.0,), upper=(1.0,))) == {
            "type": "box", "lower": [0.0], "upper": [1.0]
        }

    def test_plain_dataclass(self):
        report = InequalityReport.from_sides("demo", [1.0], [2.0], 0.0)
        data = to_jsonable(report)

        assert data["name"] == "demo"
        assert data["slack"] == [1.0]
        assert data["passed"] is True

    def test_tuple_keys_are_stringified(self):
        assert to_jsonable({(1, 2): 3}) == {"(1, 2)": 3}

    def test_unknown_type(self):
        with pytest.raises(InvalidInputError):
            to_jsonable(object())


class TestWriteJson:
    """Tests for atomic JSON writes."""

    def test_dumps_sorts_keys(self):
        text = dumps({"b": 1, "a": 2}).decode("utf-8")
        assert text.index('"a"') < text.index('"b"')

    def test_write_and_load(self, temp_dir):
        path = write_json({"verdict": "pass", "value": Fraction(1, 3)}, temp_dir, "out.json")

        assert load_json(path) == {"verdict": "pass", "value": "1/3"}

    def test_no_temp_files_left(self, temp_dir):
        write_json({"x": 1}, temp_dir)
        assert [f for f in os.listdir(temp_dir) if f.endswith(".tmp")] == []

    def test_orphaned_temp_files_cleaned(self, temp_dir):
        orphan = os.path.join(temp_dir, ".report_abc.tmp")
        with open(orphan, "w") as f:
            f.write("partial")
        write_json({"x": 1}, temp_dir)

        assert not os.path.exists(orphan)

    def test_report_is_byte_deterministic(self, temp_dir):
        document = ReportDocument("basis", {"seed": 0}, "pass", {"value": 1.5}, "1.0.0")
        first = os.path.join(temp_dir, "a")
        second = os.path.join(temp_dir, "b")
        with open(write_report(document, first), "rb") as f:
            a = f.read()
        with open(write_report(document, second), "rb") as f:
            b = f.read()

        assert a == b

    def test_invalid_json(self, temp_dir):
        path = os.path.join(temp_dir, "broken.json")
        with open(path, "w") as f:
            f.write("{not json")
        with pytest.raises(InvalidInputError):
            load_json(path)

    def test_missing_file(self, temp_dir):
        with pytest.raises(OSError):
            load_json(os.path.join(temp_dir, "absent.json"))


class TestEmitPlotData:
    """Tests for emit_plot_data() CSV output."""

    def test_frequency_trace_columns(self, temp_dir):
        trace = FrequencyTrace(
            times=[0.0, 0.5],
            f_norm_sq=[1.0, 0.5],
            frequency=[2.0, 1.5],
            rest_term=[0.0, 0.0],
            boundary_term=[0.1, 0.2],
        )
        rows = read_plot_data(emit_plot_data(trace, temp_dir, "trace"))

        assert list(rows[0]) == ["t", "f_norm_sq", "N", "rest_term", "boundary_term"]
        assert len(rows) == 2
        assert float(rows[1]["N"]) == 1.5

    def test_empty_trace_is_header_only(self, temp_dir):
        path = emit_plot_data(FrequencyTrace(), temp_dir, "empty")
        with open(path, encoding="utf-8") as f:
            lines = f.read().splitlines()

        assert lines == ["t,f_norm_sq,N,rest_term,boundary_term"]

    def test_evolution_trace(self, temp_dir):
        trace = EvolutionTrace(times=[0.0], l2=[1.0], form=[2.0], l2_omega=[0.5], l1_omega=[0.4])
        rows = read_plot_data(emit_plot_data(trace, temp_dir, "evolve"))

        assert rows[0]["l2_omega"] == "0.5"

    def test_inequality_report(self, temp_dir):
        report = InequalityReport.from_sides("demo", [1.0, 3.0], [2.0, 2.0], 0.0)
        rows = read_plot_data(emit_plot_data(report, temp_dir, "report"))

        assert [r["slack"] for r in rows] == ["1.0", "-1.0"]

    def test_records_union_header(self, temp_dir):
        records = [{"ell": 2, "verdict": "pass"}, {"ell": 4, "note": "x"}]
        rows = read_plot_data(emit_plot_data(records, temp_dir, "summary"))

        assert list(rows[0]) == ["ell", "verdict", "note"]
        assert rows[1]["verdict"] == ""

    def test_unwritable_path(self, temp_dir):
        blocker = os.path.join(temp_dir, "file")
        with open(blocker, "w") as f:
            f.write("x")
        with pytest.raises(OSError):
            emit_plot_data(FrequencyTrace(), os.path.join(blocker, "sub"), "trace")


class TestSweepFileStem:
    """Tests for sweep_file_stem() naming."""

    def test_integer_valued_floats(self):
        assert sweep_file_stem("interpolation", {"ell": 2.0}) == "interpolation_ell-2"

    def test_keys_sorted(self):
        assert sweep_file_stem("chain", {"r": 0.5, "epsilon": 0.25}) == "chain_epsilon-0.25_r-0.5"

    def test_distinct_names_for_ell_sweep(self):
        stems = {sweep_file_stem("interpolation", {"ell": ell}) for ell in (2, 4, 8)}
        assert stems == {"interpolation_ell-2", "interpolation_ell-4", "interpolation_ell-8"}
