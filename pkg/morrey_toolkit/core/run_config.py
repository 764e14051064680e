# morrey_toolkit/core/run_config.py
"""
The JSON run configuration consumed by every CLI subcommand.

The whole document is validated before any computation starts; unknown keys
are rejected. Blocks a subcommand does not use may be omitted.
"""

import json
import logging
import math
from pathlib import Path
from typing import List, Literal, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, ValidationError

from core.catalog import FunctionSpec, RadiiSet, WeightSpec
from core.errors import BadConfigError
from core.grid import Grid, Point
from core.kernel import RoughKernel

logger = logging.getLogger(__name__)

Command = Literal["norm", "apply", "hardy", "check", "verify", "kernel-info"]
NormKind = Literal[
    "local_morrey",
    "weak_local_morrey",
    "global_morrey",
    "weak_global_morrey",
    "classical_local_morrey",
    "central_morrey",
    "beurling",
    "homogeneous_beurling",
    "beurling_algebra",
    "homogeneous_beurling_algebra",
    "cbmo",
]
OperatorName = Literal[
    "riesz",
    "maximal",
    "commutator_riesz",
    "commutator_maximal",
    "marcinkiewicz",
    "commutator_marcinkiewicz",
    "semigroup",
]
ConditionName = Literal["doubling", "nakai", "spanne", "guliyev", "commutator"]


class _Block(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid", populate_by_name=True)


class ParamsBlock(_Block):
    """Raw exponents; the services turn them into validated OperatorParams."""

    alpha: float = 0.0
    p: Optional[float] = None
    q: Optional[float] = None
    s: Optional[float] = None
    p1: Optional[float] = None
    p2: Optional[float] = None
    q1: Optional[float] = None
    lambda_c: float = Field(default=0.0, alias="lambda")


class NormBlock(_Block):
    kind: NormKind = "local_morrey"
    p: float = 2.0
    q: float = 1.0
    lam: Optional[float] = None
    lambda_c: float = Field(default=0.0, alias="lambda")
    mu: Optional[float] = None
    k_range: Optional[Tuple[int, int]] = None
    k_max: Optional[int] = None


class PointsBlock(_Block):
    kind: Literal["diameter", "subgrid", "at", "ball", "all"] = "diameter"
    count: int = Field(default=65, ge=1)
    per_axis: int = Field(default=8, ge=1)
    coords: List[Point] = []
    center: Optional[Point] = None
    radius: Optional[float] = None


class HardyBlock(_Block):
    v1: WeightSpec
    v2: WeightSpec
    w: WeightSpec


class SweepBlock(_Block):
    name: str
    base: dict
    parameter: str
    values: List[float] = Field(min_length=1)


class NamedFunctionBlock(_Block):
    id: str
    spec: FunctionSpec


class NormSelectorBlock(_Block):
    mode: Literal["strong", "weak"] = "strong"
    scope: Literal["local", "global"] = "local"


class ExperimentBlock(_Block):
    kind: Literal["boundedness", "stability", "lemma", "pointwise", "cbmo_log"] = "boundedness"
    functions: List[NamedFunctionBlock] = []
    sweeps: List[SweepBlock] = []
    norm: NormSelectorBlock = NormSelectorBlock()
    points_per_axis: int = Field(default=8, ge=1)
    ratio_cap: Optional[float] = None


class RunConfig(_Block):
    command: Optional[Command] = None
    grid: Optional[Grid] = None
    kernel: Optional[RoughKernel] = None
    function: Optional[FunctionSpec] = None
    symbol: Optional[FunctionSpec] = None
    weight1: Optional[WeightSpec] = None
    weight2: Optional[WeightSpec] = None
    params: Optional[ParamsBlock] = None
    radii: Optional[RadiiSet] = None
    x0: Optional[Point] = None
    centers: List[Point] = []
    operator: Optional[OperatorName] = None
    norm: NormBlock = NormBlock()
    points: PointsBlock = PointsBlock()
    t_grid: Optional[RadiiSet] = None
    hardy: Optional[HardyBlock] = None
    condition: Optional[ConditionName] = None
    experiment: Optional[ExperimentBlock] = None
    r_list: Optional[RadiiSet] = None
    radius_pairs: List[Tuple[float, float]] = []
    s_values: List[float] = [2.0, 4.0, math.inf]
    output: Optional[str] = None
    format: Optional[Literal["csv", "json"]] = None

    def require(self, *names: str) -> None:
        missing = [name for name in names if getattr(self, name) is None]
        if missing:
            raise BadConfigError(f"config is missing {', '.join(repr(m) for m in missing)}")

    def origin(self) -> Point:
        """x0, defaulting to the origin of the grid's dimension."""
        if self.x0 is not None:
            return tuple(self.x0)
        dim = self.grid.dim if self.grid is not None else (self.params_dim() or 1)
        return (0.0,) * dim

    def params_dim(self) -> Optional[int]:
        if self.grid is not None:
            return self.grid.dim
        if self.kernel is not None:
            return self.kernel.dim
        return None


def _first_problem(error: ValidationError) -> str:
    first = error.errors()[0]
    where = ".".join(str(part) for part in first["loc"]) or "config"
    return f"{where}: {first['msg']}"


def parse_run_config(text: str) -> RunConfig:
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as e:
        raise BadConfigError(f"malformed JSON: {e.msg} (line {e.lineno})") from e
    if not isinstance(raw, dict):
        raise BadConfigError("the config must be a JSON object")
    try:
        return RunConfig.model_validate(raw)
    except ValidationError as e:
        raise BadConfigError(_first_problem(e)) from e


def load_run_config(path: str) -> RunConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise BadConfigError(f"cannot read config '{path}': {e.strerror}") from e
    logger.debug(f"Loaded config from {path}")
    return parse_run_config(text)
