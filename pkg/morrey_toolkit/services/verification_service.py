# morrey_toolkit/services/verification_service.py
"""
Experiment harness: boundedness ratio sweeps between local Morrey spaces,
the local L_q estimate on balls, pointwise dominations between operators,
the two-radius CBMO lemma and resolution stability.

Nothing here proves boundedness. Each experiment reports ratios and flags
the evidence (growth trends, truncated sups, violations) that says otherwise.
"""

import logging
import math
from typing import Any, Dict, List, Literal, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, TypeAdapter, model_validator

from core.catalog import FunctionSpec, RadiiSet, WeightSpec, sample, support_radius
from core.config import settings
from core.errors import BadConfigError, ToolkitError
from core.grid import (
    BallSpec,
    Grid,
    GridFunction,
    Point,
    ball_volume,
    lp_norm_ball,
    weak_lp_norm_ball,
)
from core.halfline import log_midpoints
from core.kernel import ConstantKernel, RoughKernel
from services.condition_service import ConditionId, check_condition, top_decade_slope
from services.norm_service import (
    NormResult,
    global_morrey_norm,
    local_morrey_norm,
    oscillation_gap,
    sentinel,
)
from services.operator_service import (
    EvalPoints,
    OperatorParams,
    apply_operator,
    commutator_dominant,
    riesz_constant,
    riesz_of_absolute,
)

logger = logging.getLogger(__name__)

OperatorName = Literal[
    "riesz",
    "maximal",
    "commutator_riesz",
    "commutator_maximal",
    "marcinkiewicz",
    "commutator_marcinkiewicz",
    "semigroup",
]
ExperimentKind = Literal["boundedness", "lemma", "pointwise", "cbmo_log"]

_function_adapter = TypeAdapter(FunctionSpec)


# ========================================================================
# EXPERIMENT SPEC
# ========================================================================

class NormSelector(BaseModel):
    model_config = ConfigDict(frozen=True)

    mode: Literal["strong", "weak"] = "strong"
    scope: Literal["local", "global"] = "local"
    x0: Optional[Point] = None
    centers: List[Point] = []


class NamedFunction(BaseModel):
    model_config = ConfigDict(frozen=True)

    id: str
    spec: FunctionSpec


class FunctionSweep(BaseModel):
    """One catalog family with a single parameter run over a declared grid."""

    model_config = ConfigDict(frozen=True)

    name: str
    base: Dict[str, Any]
    parameter: str
    values: List[float] = Field(min_length=1)

    def expand(self) -> List[Tuple[str, float, FunctionSpec]]:
        return [
            (f"{self.name}[{self.parameter}={v:g}]", float(v), _function_adapter.validate_python({**self.base, self.parameter: v}))
            for v in self.values
        ]


class ExperimentSpec(BaseModel):
    model_config = ConfigDict(frozen=True)

    operator: OperatorName = "riesz"
    params: OperatorParams
    kernel: RoughKernel
    symbol: Optional[FunctionSpec] = None
    weight1: WeightSpec
    weight2: WeightSpec
    norm: NormSelector = NormSelector()
    functions: List[NamedFunction] = []
    sweeps: List[FunctionSweep] = []
    grid: Grid
    radii: RadiiSet
    t_grid: Optional[RadiiSet] = None
    points_per_axis: int = Field(default=8, ge=1)
    ratio_cap: Optional[float] = None
    condition: Optional[ConditionId] = None

    @model_validator(mode="after")
    def _check_shape(self) -> "ExperimentSpec":
        if not self.functions and not self.sweeps:
            raise BadConfigError("an experiment needs at least one function or sweep")
        if self.params.dim != self.grid.dim or self.kernel.dim != self.grid.dim:
            raise BadConfigError("params, kernel and grid must share one dimension")
        if self.norm.x0 is not None and len(self.norm.x0) != self.grid.dim:
            raise BadConfigError(f"x0 {self.norm.x0} does not match dimension {self.grid.dim}")
        if self.operator.startswith("commutator") and self.symbol is None:
            raise BadConfigError(f"operator '{self.operator}' needs a symbol b")
        return self

    @property
    def x0(self) -> Point:
        return tuple(self.norm.x0) if self.norm.x0 is not None else (0.0,) * self.grid.dim

    @property
    def centers(self) -> List[Point]:
        return [tuple(c) for c in self.norm.centers] or [self.x0]

    def function_rows(self) -> List[Tuple[str, Optional[float], FunctionSpec, Optional[str]]]:
        """(id, sweep parameter, spec, sweep name) in declared order."""
        rows: List[Tuple[str, Optional[float], FunctionSpec, Optional[str]]] = [
            (named.id, None, named.spec, None) for named in self.functions
        ]
        for sweep in self.sweeps:
            rows.extend((fid, value, fspec, sweep.name) for fid, value, fspec in sweep.expand())
        return rows

    def default_condition(self) -> Optional[ConditionId]:
        if self.condition is not None:
            return self.condition
        if self.params.p is None:
            return None
        return "commutator" if self.operator.startswith("commutator") else "guliyev"


# ========================================================================
# REPORTS
# ========================================================================

class ExperimentRow(BaseModel):
    """One function (or one point, radius or radius pair) of an experiment.

    ``input_norm``/``output_norm`` hold the two sides being compared: the
    Morrey norms of f and Tf, the lemma's right and left sides, the dominating
    and dominated values, or the normalized norm and the oscillation gap.
    """

    function_id: str
    parameter: Optional[float] = None
    r: Optional[float] = None
    r2: Optional[float] = None
    point: Optional[Point] = None
    input_norm: Optional[float] = None
    output_norm: Optional[float] = None
    ratio: Optional[float] = None
    output_slope: Optional[float] = None
    boundary_hit: bool = False
    error: Optional[str] = None


class ExperimentReport(BaseModel):
    kind: ExperimentKind
    operator: Optional[str] = None
    rows: List[ExperimentRow]
    sup_ratio: float
    worst_function: Optional[str] = None
    spread: Optional[float] = None
    condition_id: Optional[str] = None
    condition_verdict: Optional[str] = None
    condition_C: Optional[float] = None
    output_slope: Optional[float] = None
    sweep_slope: Optional[float] = None
    ratio_cap: Optional[float] = None
    flags: List[str] = []
    passed: bool


class StabilityReport(BaseModel):
    coarse: ExperimentReport
    fine: ExperimentReport
    relative_change: float
    stable: bool


def _ratio(numerator: float, denominator: float) -> float:
    if denominator == 0.0:
        return 0.0 if numerator == 0.0 else math.inf
    return sentinel(numerator / denominator)


def _summary(rows: List[ExperimentRow]) -> Tuple[float, Optional[str]]:
    scored = [row for row in rows if row.error is None and row.ratio is not None]
    if not scored:
        return 0.0, None
    worst = max(scored, key=lambda row: row.ratio)
    return worst.ratio, worst.function_id


def _spread(rows: List[ExperimentRow]) -> Optional[float]:
    ratios = [row.ratio for row in rows if row.ratio is not None and 0 < row.ratio < math.inf]
    if not ratios:
        return None
    return max(ratios) / min(ratios)


def _error_row(fid: str, error: ToolkitError, **fields) -> ExperimentRow:
    logger.warning(f"⚠️ Row '{fid}' aborted: {error}")
    return ExperimentRow(function_id=fid, error=str(error), **fields)


def _sample_symbol(spec: ExperimentSpec) -> Optional[GridFunction]:
    return sample(spec.symbol, spec.grid) if spec.symbol is not None else None


def _eval_points(spec: ExperimentSpec, radius: float) -> EvalPoints:
    """Every cell center inside a ball of ``radius`` about one of the centers."""
    balls = [EvalPoints.ball(spec.grid, c, radius).indices for c in spec.centers]
    return EvalPoints(spec.grid, np.unique(np.concatenate(balls)))


# ========================================================================
# BOUNDEDNESS
# ========================================================================

def _morrey(spec: ExperimentSpec, g: GridFunction, exponent: float, weight: WeightSpec, weak: bool) -> NormResult:
    if spec.norm.scope == "global":
        return global_morrey_norm(g, exponent, weight, spec.centers, spec.radii, weak)
    return local_morrey_norm(g, exponent, weight, spec.x0, spec.radii, weak)


def _terms_by_radius(result: NormResult, count: int) -> np.ndarray:
    terms = np.array([row.term for row in result.per_radius]).reshape(-1, count)
    return terms.max(axis=0)


def _record_condition(spec: ExperimentSpec) -> Dict[str, Any]:
    condition_id = spec.default_condition()
    if condition_id is None:
        return {}
    try:
        report = check_condition(
            condition_id,
            spec.weight1,
            spec.weight2,
            spec.params,
            spec.x0,
            spec.radii,
        )
    except ToolkitError as e:
        logger.warning(f"⚠️ Condition '{condition_id}' could not be checked: {e}")
        return {"condition_id": condition_id, "condition_verdict": f"error: {e}"}
    return {
        "condition_id": condition_id,
        "condition_verdict": report.verdict,
        "condition_C": report.empirical_C,
    }


def _boundedness_row(
    spec: ExperimentSpec,
    fid: str,
    parameter: Optional[float],
    fspec: FunctionSpec,
    b: Optional[GridFunction],
    points: EvalPoints,
    threads: Optional[int],
) -> ExperimentRow:
    params = spec.params
    weak = spec.norm.mode == "weak" or params.p == 1
    try:
        if params.p is None:
            raise BadConfigError("boundedness experiments need the exponent p")
        f = sample(fspec, spec.grid)
        input_norm = _morrey(spec, f, params.p, spec.weight1, weak=False)
        result = apply_operator(spec.operator, f, spec.kernel, params, points, b, spec.t_grid, threads)
        output = _morrey(spec, result.dense(), params.target_q, spec.weight2, weak=weak)
    except ToolkitError as e:
        return _error_row(fid, e, parameter=parameter)

    slope = top_decade_slope(spec.radii.values, _terms_by_radius(output, spec.radii.count))
    return ExperimentRow(
        function_id=fid,
        parameter=parameter,
        input_norm=input_norm.value,
        output_norm=output.value,
        ratio=_ratio(output.value, input_norm.value),
        output_slope=slope,
        boundary_hit=output.argmax_radius == float(spec.radii.values[-1]) and output.value > 0,
    )


def _sweep_slope(rows: List[ExperimentRow], sweeps: Dict[str, List[int]]) -> Optional[float]:
    """Steepest log-log slope of the ratio along any declared sweep."""
    slopes = []
    for indices in sweeps.values():
        usable = [
            rows[i] for i in indices
            if rows[i].error is None and rows[i].ratio is not None and 0 < rows[i].ratio < math.inf
        ]
        if len(usable) < 2:
            continue
        x = np.log([row.parameter for row in usable])
        y = np.log([row.ratio for row in usable])
        slopes.append(float(np.polyfit(x, y, 1)[0]))
    return max(slopes) if slopes else None


def run_boundedness_experiment(spec: ExperimentSpec, threads: Optional[int] = None) -> ExperimentReport:
    """Ratios ‖Tf‖_{LM_{q,φ₂}} / ‖f‖_{LM_{p,φ₁}} over the declared functions."""
    thresholds = settings.thresholds()
    condition = _record_condition(spec)
    b = _sample_symbol(spec)
    points = _eval_points(spec, spec.radii.r_max)
    logger.info(f"⚙️ Boundedness experiment for {spec.operator} at {len(points)} points")

    rows: List[ExperimentRow] = []
    sweeps: Dict[str, List[int]] = {}
    for fid, parameter, fspec, sweep in spec.function_rows():
        if sweep is not None:
            sweeps.setdefault(sweep, []).append(len(rows))
        rows.append(_boundedness_row(spec, fid, parameter, fspec, b, points, threads))

    sup_ratio, worst = _summary(rows)
    slopes = [row.output_slope for row in rows if row.output_slope is not None]
    output_slope = max(slopes) if slopes else None
    sweep_slope = _sweep_slope(rows, sweeps)

    flags = []
    if any(s is not None and s >= thresholds.unbounded_slope for s in (output_slope, sweep_slope)):
        flags.append("unbounded-trend")
    if any(row.boundary_hit for row in rows):
        flags.append("sup-truncation")
    if any(row.error is not None for row in rows):
        flags.append("row-error")
    if math.isinf(sup_ratio):
        flags.append("infinite-ratio")
    capped = spec.ratio_cap is None or sup_ratio <= spec.ratio_cap
    passed = capped and not {"unbounded-trend", "row-error", "infinite-ratio"} & set(flags)

    for flag in flags:
        logger.warning(f"⚠️ Experiment flag: {flag}")
    logger.info(f"✅ sup ratio {sup_ratio:.6g} (worst: {worst}), passed={passed}")
    return ExperimentReport(
        kind="boundedness",
        operator=spec.operator,
        rows=rows,
        sup_ratio=sup_ratio,
        worst_function=worst,
        output_slope=output_slope,
        sweep_slope=sweep_slope,
        ratio_cap=spec.ratio_cap,
        flags=flags,
        passed=passed,
        **condition,
    )


def run_resolution_stability(spec: ExperimentSpec, threads: Optional[int] = None) -> StabilityReport:
    """Rerun the boundedness experiment with the cell count doubled."""
    coarse = run_boundedness_experiment(spec, threads)
    fine = run_boundedness_experiment(spec.model_copy(update={"grid": spec.grid.refined()}), threads)
    change = _ratio(abs(fine.sup_ratio - coarse.sup_ratio), coarse.sup_ratio)
    stable = change <= settings.STABILITY_TOLERANCE
    logger.info(f"🧭 sup ratio {coarse.sup_ratio:.6g} → {fine.sup_ratio:.6g} under refinement (stable={stable})")
    return StabilityReport(coarse=coarse, fine=fine, relative_change=change, stable=stable)


# ========================================================================
# LOCAL ESTIMATE
# ========================================================================

def _ball_profile(f: GridFunction, x0: Point, p: float):
    """t ↦ ‖f‖_{L_p(B(x0,t))} from one sort of the cell distances."""
    diff = np.asarray(f.grid.points) - np.asarray(x0, dtype=float)
    dist = np.sqrt(np.einsum("ij,ij->i", diff, diff))
    order = np.argsort(dist, kind="stable")
    sorted_dist = dist[order]
    mass = np.concatenate([[0.0], np.cumsum(np.abs(f.values[order]) ** p)]) * f.grid.cell_volume

    def norm_at(t: np.ndarray) -> np.ndarray:
        return mass[np.searchsorted(sorted_dist, t, side="left")] ** (1.0 / p)

    return norm_at, float(mass[-1]) ** (1.0 / p)


def _full_radius(grid: Grid, x0: Point, fspec: FunctionSpec) -> float:
    """A radius past which every ball about x0 holds all of f's samples."""
    x0 = np.asarray(x0, dtype=float)
    corner = float(np.linalg.norm(np.abs(x0) + grid.half_extent)) + grid.spacing
    support = support_radius(fspec)
    if support is None:
        return corner
    return min(corner, float(np.linalg.norm(x0)) + support + grid.spacing * math.sqrt(grid.dim))


def lemma_rhs(f: GridFunction, fspec: FunctionSpec, p: float, q: float, x0: Point, r: float) -> float:
    """r^{n/q} ∫_{2r}^∞ t^{-n/q-1} ‖f‖_{L_p(B(x0,t))} dt."""
    n = f.grid.dim
    profile, total = _ball_profile(f, x0, p)
    t_full = _full_radius(f.grid, x0, fspec)
    start = 2.0 * r
    body = 0.0
    if start < t_full:
        nodes, step = log_midpoints(start, t_full)
        body = float(np.sum(nodes ** (-n / q) * profile(nodes))) * step
    tail = total * max(start, t_full) ** (-n / q) * q / n
    return r ** (n / q) * (body + tail)


def run_lemma_local_estimate(
    spec: ExperimentSpec,
    r_list: RadiiSet,
    threads: Optional[int] = None,
) -> ExperimentReport:
    """C(r) = ‖Tf‖_{L_q(B(x0,r))} / (r^{n/q} ∫_{2r}^∞ t^{-n/q-1}‖f‖_{L_p(B(x0,t))} dt)."""
    params = spec.params
    if params.p is None:
        raise BadConfigError("the local estimate needs the exponent p")
    p, q, x0 = params.p, params.target_q, spec.x0
    weak = p == 1
    b = _sample_symbol(spec)
    points = EvalPoints.ball(spec.grid, x0, r_list.r_max)
    logger.info(f"⚙️ Local estimate for {spec.operator} over {r_list.count} radii (weak={weak})")

    rows: List[ExperimentRow] = []
    flags: List[str] = []
    for fid, parameter, fspec, _ in spec.function_rows():
        try:
            f = sample(fspec, spec.grid)
            tf = apply_operator(spec.operator, f, spec.kernel, params, points, b, spec.t_grid, threads).dense()
        except ToolkitError as e:
            rows.append(_error_row(fid, e, parameter=parameter))
            continue
        for r in r_list.values:
            ball = BallSpec(center=x0, radius=float(r))
            try:
                lhs = weak_lp_norm_ball(tf, q, ball) if weak else lp_norm_ball(tf, q, ball)
                rhs = lemma_rhs(f, fspec, p, q, x0, float(r))
            except ToolkitError as e:
                rows.append(_error_row(fid, e, parameter=parameter, r=float(r)))
                continue
            if rhs == 0.0 and lhs > 0.0:
                logger.warning(f"⚠️ Local estimate violated for '{fid}' at r={r:g}: RHS 0, LHS {lhs:.3e}")
                if "violation" not in flags:
                    flags.append("violation")
            rows.append(ExperimentRow(
                function_id=fid,
                parameter=parameter,
                r=float(r),
                input_norm=rhs,
                output_norm=lhs,
                ratio=_ratio(lhs, rhs),
            ))

    if any(row.error is not None for row in rows):
        flags.append("row-error")
    sup_ratio, worst = _summary(rows)
    spread = _spread(rows)
    logger.info(f"✅ Local estimate: max C(r) = {sup_ratio:.6g}, spread {spread}")
    return ExperimentReport(
        kind="lemma",
        operator=spec.operator,
        rows=rows,
        sup_ratio=sup_ratio,
        worst_function=worst,
        spread=spread,
        ratio_cap=spec.ratio_cap,
        flags=flags,
        passed=not flags and (spec.ratio_cap is None or sup_ratio <= spec.ratio_cap),
    )


# ========================================================================
# POINTWISE DOMINATION
# ========================================================================

def _dominating(
    spec: ExperimentSpec,
    f: GridFunction,
    b: Optional[GridFunction],
    points: EvalPoints,
    threads: Optional[int],
) -> np.ndarray:
    """The bound each operator is compared against at ``points``."""
    n, alpha, k = spec.grid.dim, spec.params.alpha, spec.kernel
    radial = ball_volume(n, 1.0) ** (alpha / n - 1.0)
    name = spec.operator
    if name == "semigroup":
        riesz = riesz_of_absolute(f, ConstantKernel(dim=n, c=1.0), alpha, points, threads)
        return riesz_constant(n, alpha) * riesz.values
    if name.startswith("commutator"):
        dominant = commutator_dominant(b, f, k, alpha, points, threads).values
        if name == "commutator_maximal":
            return radial * dominant
        if name == "commutator_marcinkiewicz":
            return dominant / math.sqrt(2.0)
        return dominant
    riesz = riesz_of_absolute(f, k, alpha, points, threads).values
    if name == "maximal":
        return radial * riesz
    if name == "marcinkiewicz":
        return riesz / math.sqrt(2.0)
    return riesz


def run_pointwise_checks(spec: ExperimentSpec, threads: Optional[int] = None) -> ExperimentReport:
    """Compare each operator with its dominating potential point by point.

    The semigroup potential is checked for two-sided agreement with c_{n,α}I_α.
    """
    tol = settings.POINTWISE_TOLERANCE
    two_sided = spec.operator == "semigroup"
    b = _sample_symbol(spec)
    points = EvalPoints.subgrid(spec.grid, spec.points_per_axis)
    coords = points.coords
    logger.info(f"⚙️ Pointwise checks for {spec.operator} at {len(points)} points")

    rows: List[ExperimentRow] = []
    violations = 0
    for fid, parameter, fspec, _ in spec.function_rows():
        try:
            f = sample(fspec, spec.grid)
            dominated = np.abs(apply_operator(spec.operator, f, spec.kernel, spec.params, points, b, spec.t_grid, threads).values)
            dominating = _dominating(spec, f, b, points, threads)
        except ToolkitError as e:
            rows.append(_error_row(fid, e, parameter=parameter))
            continue
        for point, low, high in zip(coords, dominated, dominating):
            ratio = _ratio(float(low), float(high))
            ok = abs(ratio - 1.0) <= tol if two_sided and high > 0 else ratio <= 1.0 + tol
            violations += not ok
            rows.append(ExperimentRow(
                function_id=fid,
                parameter=parameter,
                point=tuple(float(c) for c in point),
                input_norm=float(high),
                output_norm=float(low),
                ratio=ratio,
            ))

    flags = []
    if violations:
        logger.warning(f"⚠️ {violations} points break the pointwise bound")
        flags.append("violation")
    if any(row.error is not None for row in rows):
        flags.append("row-error")
    sup_ratio, worst = _summary(rows)
    return ExperimentReport(
        kind="pointwise",
        operator=spec.operator,
        rows=rows,
        sup_ratio=sup_ratio,
        worst_function=worst,
        flags=flags,
        passed=not flags,
    )


# ========================================================================
# CBMO TWO-RADIUS LEMMA
# ========================================================================

def run_cbmo_log_lemma(
    b_spec: FunctionSpec,
    q: float,
    lambda_c: float,
    x0: Point,
    radius_pairs: Sequence[Tuple[float, float]],
    grid: Grid,
) -> ExperimentReport:
    """C = gap(r₁, r₂) / ((1 + |ln r₁/r₂|)·‖b‖_CBMO), the norm taken over every radius in the pairs."""
    if not radius_pairs:
        raise BadConfigError("no radius pairs")
    b = sample(b_spec, grid)
    radii = sorted({float(r) for pair in radius_pairs for r in pair})
    norm = max(oscillation_gap(b, q, lambda_c, x0, r, r) for r in radii)
    logger.info(f"⚙️ CBMO log lemma over {len(radius_pairs)} pairs, ‖b‖ = {norm:.6g}")

    rows = []
    flags = []
    for r1, r2 in radius_pairs:
        gap = oscillation_gap(b, q, lambda_c, x0, float(r1), float(r2))
        scale = (1.0 + abs(math.log(r1 / r2))) * norm
        if scale == 0.0 and gap > 0.0 and "violation" not in flags:
            logger.warning(f"⚠️ Nonzero gap {gap:.3e} with a vanishing CBMO norm")
            flags.append("violation")
        rows.append(ExperimentRow(
            function_id=b_spec.family,
            r=float(r1),
            r2=float(r2),
            input_norm=scale,
            output_norm=gap,
            ratio=_ratio(gap, scale),
        ))

    sup_ratio, worst = _summary(rows)
    return ExperimentReport(
        kind="cbmo_log",
        rows=rows,
        sup_ratio=sup_ratio,
        worst_function=worst,
        flags=flags,
        passed=not flags,
    )
