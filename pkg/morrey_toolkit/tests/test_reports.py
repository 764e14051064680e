"""
tests/test_reports.py
---------------------
CSV / JSON layout of the emitted reports.
"""

import json
import math

import numpy as np
import pytest

from core.grid import Grid
from core.kernel import ConstantKernel, kernel_info
from services.hardy_service import HardyReport, HardyRow
from services.norm_service import AlgebraNormResult, NormResult, RadiusTerm
from services.operator_service import EvalPoints, OperatorResult
from services.report_service import (
    EXPERIMENT_COLUMNS,
    format_cell,
    render,
    schema_line,
    to_csv,
    to_json,
    to_table,
    write_report,
)
from services.verification_service import ExperimentReport, ExperimentRow


@pytest.fixture
def norm_result():
    return NormResult(
        kind="local_morrey",
        value=1.5,
        argmax_radius=0.5,
        argmax_center=(0.0,),
        per_radius=[RadiusTerm(radius=0.5, term=1.5, center=(0.0,)), RadiusTerm(radius=1.0, term=0.1, center=(0.0,))],
    )


@pytest.fixture
def infinite_hardy():
    return HardyReport(B=math.inf, per_t=[HardyRow(t=1.0, value=math.inf)], verdict="infinite")


def test_format_cell():
    assert format_cell(None) == ""
    assert format_cell(True) == "true"
    assert format_cell(0.1) == "0.1"
    assert format_cell(math.inf) == "inf"
    assert format_cell((0.5, -1.0)) == "0.5 -1.0"
    assert format_cell("holds") == "holds"


def test_csv_opens_with_schema_line(norm_result):
    lines = to_csv(norm_result).splitlines()
    assert lines[0] == schema_line() == "# schema: morrey-toolkit/1"
    assert lines[1] == "row,kind,radius,center,term"
    assert lines[-1] == "sup,local_morrey,0.5,0.0,1.5"
    assert len(lines) == 2 + 3


def test_infinity_is_spelled_out(infinite_hardy):
    csv_text = to_csv(infinite_hardy)
    assert csv_text.splitlines()[-1] == "sup,,inf,infinite"
    payload = json.loads(to_json(infinite_hardy))
    assert payload["schema"] == "morrey-toolkit/1"
    assert payload["report"]["B"] == "inf"
    assert payload["report"]["per_t"] == [{"t": 1.0, "value": "inf"}]


def test_json_keys_are_sorted(norm_result):
    text = to_json(norm_result)
    assert text == to_json(norm_result)
    report = json.loads(text)["report"]
    assert list(report) == sorted(report)


def test_algebra_table_closes_with_sum():
    result = AlgebraNormResult(value=2.0, remainder_bound=0.0, terms=[RadiusTerm(radius=1.0, term=2.0)])
    header, rows = to_table(result)
    assert header == ["row", "radius", "term"]
    assert rows[-1] == ["sum", None, 2.0]


def test_experiment_table():
    report = ExperimentReport(
        kind="boundedness",
        operator="riesz",
        rows=[
            ExperimentRow(function_id="zero", input_norm=0.0, output_norm=0.0, ratio=0.0),
            ExperimentRow(function_id="bad", error="boom"),
        ],
        sup_ratio=0.0,
        worst_function="zero",
        flags=["row-error"],
        passed=False,
    )
    header, rows = to_table(report)
    assert header == EXPERIMENT_COLUMNS
    assert rows[0][0] == "zero"
    assert rows[1][-1] == "boom"
    assert to_csv(report).splitlines()[3] == "bad,,,,,,,,,false,boom"


def test_operator_table():
    grid = Grid(dim=1, half_extent=2.0, cells=4)
    result = OperatorResult("riesz", EvalPoints(grid, np.array([1, 2])), np.array([3.0, 4.0]))
    header, rows = to_table(result)
    assert header == ["operator", "index", "x0", "value", "tail_bound"]
    assert rows == [["riesz", 1, -0.5, 3.0, None], ["riesz", 2, 0.5, 4.0, None]]
    payload = json.loads(to_json(result))["report"]
    assert payload["columns"] == header
    assert payload["rows"][1] == ["riesz", 2, 0.5, 4.0, None]


def test_kernel_info_table():
    header, rows = to_table(kernel_info(ConstantKernel(dim=1)))
    assert header == ["quantity", "value"]
    assert [row[0] for row in rows] == [
        "sphere_norm_2.0",
        "sphere_norm_4.0",
        "sphere_norm_inf",
        "cancellation_defect",
        "spherical_mean",
    ]


def test_unknown_report_type():
    with pytest.raises(TypeError):
        to_table(object())


def test_write_report(tmp_path, capsys, norm_result):
    out = tmp_path / "nested" / "norm.json"
    write_report(norm_result, "json", out)
    assert out.read_text(encoding="utf-8") == render(norm_result, "json")

    write_report(norm_result, "csv")
    assert capsys.readouterr().out == to_csv(norm_result)
