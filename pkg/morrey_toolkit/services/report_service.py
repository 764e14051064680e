# morrey_toolkit/services/report_service.py
"""
CSV and JSON serialization of every result the CLI emits.

CSV files open with a schema comment line, then one header row; the column
set of each report type is fixed. +∞ is spelled `inf` in CSV and "inf" in JSON.
Output is byte-stable: floats use repr and JSON keys are sorted.
"""

import csv
import io
import json
import logging
import math
import sys
from pathlib import Path
from typing import Any, Iterable, List, Literal, Optional, Sequence, Tuple, Union

from pydantic import BaseModel

from core.config import SCHEMA_VERSION
from core.kernel import KernelInfo
from services.condition_service import ConditionReport
from services.hardy_service import HardyReport
from services.norm_service import AlgebraNormResult, NormResult
from services.operator_service import OperatorResult
from services.verification_service import ExperimentReport, ExperimentRow, StabilityReport

logger = logging.getLogger(__name__)

Format = Literal["csv", "json"]
Report = Union[
    NormResult,
    AlgebraNormResult,
    ConditionReport,
    HardyReport,
    ExperimentReport,
    StabilityReport,
    KernelInfo,
    OperatorResult,
]
Table = Tuple[List[str], List[List[Any]]]

EXPERIMENT_COLUMNS = [
    "function_id",
    "parameter",
    "r",
    "r2",
    "point",
    "input_norm",
    "output_norm",
    "ratio",
    "output_slope",
    "boundary_hit",
    "error",
]


def schema_line() -> str:
    return f"# schema: morrey-toolkit/{SCHEMA_VERSION}"


def format_cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, (tuple, list)):
        return " ".join(format_cell(v) for v in value)
    return str(value)


def _json_safe(value: Any) -> Any:
    """Replace non-finite floats by their literal names, recursively."""
    if isinstance(value, float) and not math.isfinite(value):
        return "nan" if math.isnan(value) else ("inf" if value > 0 else "-inf")
    if isinstance(value, dict):
        return {str(k): _json_safe(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_json_safe(v) for v in value]
    return value


# ========================================================================
# TABLES
# ========================================================================

def _experiment_rows(rows: Iterable[ExperimentRow], prefix: Sequence[Any] = ()) -> List[List[Any]]:
    return [list(prefix) + [getattr(row, col) for col in EXPERIMENT_COLUMNS] for row in rows]


def _operator_table(result: OperatorResult) -> Table:
    dim = result.points.grid.dim
    header = ["operator", "index"] + [f"x{j}" for j in range(dim)] + ["value", "tail_bound"]
    coords = result.points.coords
    rows = []
    for j, idx in enumerate(result.points.indices):
        bound = None if result.tail_bound is None else float(result.tail_bound[j])
        rows.append([result.name, int(idx)] + [float(c) for c in coords[j]] + [float(result.values[j]), bound])
    return header, rows


def to_table(report: Report) -> Table:
    """The fixed column set and rows of ``report``."""
    # each table closes with a "sup" (or "sum") row carrying the headline value
    if isinstance(report, NormResult):
        rows = [["term", report.kind, t.radius, t.center, t.term] for t in report.per_radius]
        rows.append(["sup", report.kind, report.argmax_radius, report.argmax_center, report.value])
        return ["row", "kind", "radius", "center", "term"], rows
    if isinstance(report, AlgebraNormResult):
        rows = [["term", t.radius, t.term] for t in report.terms]
        rows.append(["sum", None, report.value])
        return ["row", "radius", "term"], rows
    if isinstance(report, ConditionReport):
        rows = [["term", report.condition_id, row.r, row.lhs, row.ratio, None] for row in report.per_r]
        rows.append(["sup", report.condition_id, report.argmax_r, None, report.empirical_C, report.verdict])
        return ["row", "condition_id", "r", "lhs", "ratio", "verdict"], rows
    if isinstance(report, HardyReport):
        rows = [["term", row.t, row.value, None] for row in report.per_t]
        rows.append(["sup", report.arg_t, report.B, report.verdict])
        return ["row", "t", "value", "verdict"], rows
    if isinstance(report, ExperimentReport):
        return EXPERIMENT_COLUMNS, _experiment_rows(report.rows)
    if isinstance(report, StabilityReport):
        rows = _experiment_rows(report.coarse.rows, ["coarse"]) + _experiment_rows(report.fine.rows, ["fine"])
        return ["resolution"] + EXPERIMENT_COLUMNS, rows
    if isinstance(report, KernelInfo):
        rows = [[f"sphere_norm_{s}", v] for s, v in report.sphere_norms.items()]
        rows += [["cancellation_defect", report.cancellation_defect], ["spherical_mean", report.spherical_mean]]
        return ["quantity", "value"], rows
    if isinstance(report, OperatorResult):
        return _operator_table(report)
    raise TypeError(f"no table layout for {type(report).__name__}")


def to_csv(report: Report) -> str:
    header, rows = to_table(report)
    buffer = io.StringIO()
    buffer.write(schema_line() + "\n")
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([format_cell(v) for v in row])
    return buffer.getvalue()


def to_json(report: Report) -> str:
    if isinstance(report, OperatorResult):
        header, rows = _operator_table(report)
        payload: Any = {"operator": report.name, "columns": header, "rows": rows}
    elif isinstance(report, BaseModel):
        payload = report.model_dump(mode="python")
    else:
        raise TypeError(f"cannot serialize {type(report).__name__}")
    payload = {"schema": f"morrey-toolkit/{SCHEMA_VERSION}", "report": _json_safe(payload)}
    return json.dumps(payload, sort_keys=True, indent=2, allow_nan=False) + "\n"


def render(report: Report, fmt: Format) -> str:
    return to_csv(report) if fmt == "csv" else to_json(report)


def write_report(report: Report, fmt: Format, out: Optional[Path] = None) -> None:
    """Write to ``out`` (UTF-8) or to stdout when no path is given."""
    text = render(report, fmt)
    if out is None:
        sys.stdout.write(text)
        return
    out = Path(out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(text, encoding="utf-8")
    logger.info(f"✅ Wrote {fmt} report to {out}")
