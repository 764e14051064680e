# morrey_toolkit/core/catalog.py
"""
Closed-form catalog of test functions f, symbols b and weights φ.

Functions are sampled at grid cell centers. Weights are evaluated on radii and
also describe their own behaviour as r → ∞ (the tail law), which every
improper integral of the toolkit relies on past its sample grid.
"""

import logging
import math
from dataclasses import dataclass
from typing import Annotated, List, Literal, Optional, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from core.errors import (
    BadConfigError,
    BadRadiiError,
    BadRadiusError,
    NotLocallyIntegrableError,
    SingularSampleError,
)
from core.grid import Grid, GridFunction

logger = logging.getLogger(__name__)

SCAN_POINTS = 512
TWO_PI = 2.0 * math.pi


# ========================================================================
# TEST FUNCTIONS
# ========================================================================

class _Function(BaseModel):
    model_config = ConfigDict(frozen=True)

    def evaluate(self, points: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def support_radius(self) -> float:
        return math.inf


def _radius(points: np.ndarray) -> np.ndarray:
    return np.sqrt(np.einsum("ij,ij->i", points, points))


class PowerFunction(_Function):
    family: Literal["power"] = "power"
    beta: float

    def evaluate(self, points: np.ndarray) -> np.ndarray:
        dim = points.shape[1]
        if self.beta <= -dim:
            raise NotLocallyIntegrableError(f"|x|^{self.beta} is not locally integrable in dim {dim}")
        r = _radius(points)
        if self.beta < 0 and np.any(r == 0.0):
            raise SingularSampleError(f"|x|^{self.beta} sampled at its singular point")
        with np.errstate(divide="ignore"):
            return r ** self.beta


class BallIndicator(_Function):
    family: Literal["ball_indicator"] = "ball_indicator"
    rho: float = Field(gt=0)

    def evaluate(self, points: np.ndarray) -> np.ndarray:
        return (_radius(points) <= self.rho).astype(float)

    def support_radius(self) -> float:
        return self.rho


class AnnulusIndicator(_Function):
    family: Literal["annulus_indicator"] = "annulus_indicator"
    rho1: float = Field(ge=0)
    rho2: float = Field(gt=0)

    @model_validator(mode="after")
    def _ordered(self) -> "AnnulusIndicator":
        if not self.rho1 < self.rho2:
            raise BadConfigError(f"annulus needs rho1 < rho2, got {self.rho1}, {self.rho2}")
        return self

    def evaluate(self, points: np.ndarray) -> np.ndarray:
        r = _radius(points)
        return ((r > self.rho1) & (r <= self.rho2)).astype(float)

    def support_radius(self) -> float:
        return self.rho2


class Gaussian(_Function):
    family: Literal["gaussian"] = "gaussian"
    sigma: float = Field(default=1.0, gt=0)

    def evaluate(self, points: np.ndarray) -> np.ndarray:
        r2 = np.einsum("ij,ij->i", points, points)
        return np.exp(-r2 / (2.0 * self.sigma ** 2))


class LogAbs(_Function):
    family: Literal["log_abs"] = "log_abs"

    def evaluate(self, points: np.ndarray) -> np.ndarray:
        r = _radius(points)
        if np.any(r == 0.0):
            raise SingularSampleError("log|x| sampled at the origin")
        return np.log(r)


class ConstantFunction(_Function):
    family: Literal["constant"] = "constant"
    value: float = 1.0

    def evaluate(self, points: np.ndarray) -> np.ndarray:
        return np.full(points.shape[0], self.value)

    def support_radius(self) -> float:
        return 0.0 if self.value == 0.0 else math.inf


class Shifted(_Function):
    family: Literal["shifted"] = "shifted"
    spec: "FunctionSpec"
    shift: Tuple[float, ...]

    def evaluate(self, points: np.ndarray) -> np.ndarray:
        shift = np.asarray(self.shift, dtype=float)
        if shift.size != points.shape[1]:
            raise BadConfigError(f"shift {self.shift} does not match dimension {points.shape[1]}")
        return self.spec.evaluate(points - shift)

    def support_radius(self) -> float:
        return float(np.linalg.norm(self.shift)) + self.spec.support_radius()


class Sum(_Function):
    family: Literal["sum"] = "sum"
    terms: List["FunctionSpec"] = Field(min_length=1)

    def evaluate(self, points: np.ndarray) -> np.ndarray:
        total = np.zeros(points.shape[0])
        for term in self.terms:
            total = total + term.evaluate(points)
        return total

    def support_radius(self) -> float:
        return max(t.support_radius() for t in self.terms)


class Scale(_Function):
    family: Literal["scale"] = "scale"
    factor: float
    spec: "FunctionSpec"

    def evaluate(self, points: np.ndarray) -> np.ndarray:
        return self.factor * self.spec.evaluate(points)

    def support_radius(self) -> float:
        return 0.0 if self.factor == 0.0 else self.spec.support_radius()


FunctionSpec = Annotated[
    Union[
        PowerFunction,
        BallIndicator,
        AnnulusIndicator,
        Gaussian,
        LogAbs,
        ConstantFunction,
        Shifted,
        Sum,
        Scale,
    ],
    Field(discriminator="family"),
]

for _model in (Shifted, Sum, Scale):
    _model.model_rebuild()


def sample(spec: FunctionSpec, grid: Grid) -> GridFunction:
    values = spec.evaluate(np.asarray(grid.points))
    logger.debug(f"Sampled {spec.family} on {grid.cells}^{grid.dim} cells")
    return GridFunction(grid, values)


# ========================================================================
# WEIGHTS
# ========================================================================

@dataclass(frozen=True)
class TailLaw:
    """Behaviour of a weight as r → ∞: r^exponent (1+ln r)^log_power, times a
    2π-periodic factor in ln r when ``periodic``; identically 0 when ``zero``."""

    exponent: float
    log_power: float = 0.0
    periodic: bool = False
    zero: bool = False

    def shifted(self, power: float) -> "TailLaw":
        return TailLaw(self.exponent + power, self.log_power, self.periodic, self.zero)

    def raised(self, p: float) -> "TailLaw":
        return TailLaw(self.exponent * p, self.log_power * p, self.periodic, self.zero)

    def times(self, other: "TailLaw") -> "TailLaw":
        return TailLaw(
            self.exponent + other.exponent,
            self.log_power + other.log_power,
            self.periodic or other.periodic,
            self.zero or other.zero,
        )

    def over(self, other: "TailLaw") -> "TailLaw":
        return TailLaw(
            self.exponent - other.exponent,
            self.log_power - other.log_power,
            self.periodic or other.periodic,
            self.zero,
        )

    def grows(self) -> bool:
        return self.exponent > 0 or (self.exponent == 0 and self.log_power > 0)

    def decays(self) -> bool:
        return self.exponent < 0 or (self.exponent == 0 and self.log_power < 0)


def _scan(fn, t: float) -> np.ndarray:
    """Samples of ``fn`` over one log-period [t, t·e^{2π}]."""
    taus = t * np.exp(np.linspace(0.0, TWO_PI, SCAN_POINTS))
    return fn(taus)


class _Weight(BaseModel):
    model_config = ConfigDict(frozen=True)

    def evaluate(self, r: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def tail_law(self) -> TailLaw:
        raise NotImplementedError

    def head_exponent(self) -> float:
        return self.tail_law().exponent

    def tail_extreme(self, t: float, extra_power: float, mode: str) -> float:
        """sup (mode="sup") or inf (mode="inf") of φ(τ)τ^extra_power over τ ≥ t."""
        raise NotImplementedError

    def _powered(self, extra_power: float):
        return lambda tau: self.evaluate(np.asarray(tau, dtype=float)) * np.asarray(tau, dtype=float) ** extra_power


class PowerLaw(_Weight):
    family: Literal["power_law"] = "power_law"
    kappa: float

    def evaluate(self, r: np.ndarray) -> np.ndarray:
        return np.asarray(r, dtype=float) ** self.kappa

    def tail_law(self) -> TailLaw:
        return TailLaw(self.kappa)

    def tail_extreme(self, t: float, extra_power: float, mode: str) -> float:
        k = self.kappa + extra_power
        if mode == "sup":
            return math.inf if k > 0 else t ** k
        return 0.0 if k < 0 else t ** k


class PowerLog(_Weight):
    family: Literal["power_log"] = "power_log"
    kappa: float
    m: float

    def evaluate(self, r: np.ndarray) -> np.ndarray:
        r = np.asarray(r, dtype=float)
        return r ** self.kappa * (1.0 + np.abs(np.log(r))) ** self.m

    def tail_law(self) -> TailLaw:
        return TailLaw(self.kappa, self.m)

    def tail_extreme(self, t: float, extra_power: float, mode: str) -> float:
        law = self.tail_law().shifted(extra_power)
        k, m = law.exponent, law.log_power
        if mode == "sup" and law.grows():
            return math.inf
        if mode == "inf" and law.decays():
            return 0.0
        candidates = [t]
        if t < 1.0:
            candidates.append(1.0)
        if k != 0:
            above = math.exp(-m / k - 1.0)
            if above > max(t, 1.0):
                candidates.append(above)
            below = math.exp(1.0 - m / k)
            if t < below < 1.0:
                candidates.append(below)
        vals = self._powered(extra_power)(np.array(candidates))
        return float(np.max(vals) if mode == "sup" else np.min(vals))


class OscPower(_Weight):
    family: Literal["osc_power"] = "osc_power"
    kappa: float
    a: float = Field(default=1.0, gt=0)

    def evaluate(self, r: np.ndarray) -> np.ndarray:
        r = np.asarray(r, dtype=float)
        return self.a * r ** self.kappa * (2.0 + np.sin(np.log(r)))

    def tail_law(self) -> TailLaw:
        return TailLaw(self.kappa, periodic=True)

    def tail_extreme(self, t: float, extra_power: float, mode: str) -> float:
        k = self.kappa + extra_power
        if mode == "sup":
            if k > 0:
                return math.inf
            if k == 0:
                return 3.0 * self.a
            return float(np.max(_scan(self._powered(extra_power), t)))
        if k < 0:
            return 0.0
        if k == 0:
            return self.a
        return float(np.min(_scan(self._powered(extra_power), t)))


class Tabulated(_Weight):
    family: Literal["tabulated"] = "tabulated"
    r_values: Tuple[float, ...]
    phi_values: Tuple[float, ...]
    kappa_tail: float
    kappa_head: float = 0.0
    interpolation: Literal["step", "loglog"] = "step"
    zero_tail: bool = False

    @model_validator(mode="after")
    def _check_table(self) -> "Tabulated":
        r = np.asarray(self.r_values, dtype=float)
        phi = np.asarray(self.phi_values, dtype=float)
        if r.size < 2 or r.size != phi.size:
            raise BadConfigError("tabulated weight needs matching r/phi tables of length >= 2")
        if not (np.all(r > 0) and np.all(np.diff(r) > 0)):
            raise BadConfigError("tabulated radii must be positive and strictly increasing")
        if not (np.all(phi > 0) and np.all(np.isfinite(phi))):
            raise BadConfigError("tabulated weight values must be positive and finite")
        return self

    def evaluate(self, r: np.ndarray) -> np.ndarray:
        r = np.atleast_1d(np.asarray(r, dtype=float))
        table_r = np.asarray(self.r_values)
        table_phi = np.asarray(self.phi_values)
        r0, r_end = table_r[0], table_r[-1]

        if self.interpolation == "step":
            idx = np.clip(np.searchsorted(table_r, r, side="right") - 1, 0, table_r.size - 1)
            out = table_phi[idx]
        else:
            out = np.exp(np.interp(np.log(r), np.log(table_r), np.log(table_phi)))

        out = np.where(r < r0, table_phi[0] * (r / r0) ** self.kappa_head, out)
        tail = 0.0 if self.zero_tail else table_phi[-1] * (r / r_end) ** self.kappa_tail
        return np.where(r > r_end, tail, out)

    def tail_law(self) -> TailLaw:
        return TailLaw(self.kappa_tail, zero=self.zero_tail)

    def head_exponent(self) -> float:
        return self.kappa_head

    def tail_extreme(self, t: float, extra_power: float, mode: str) -> float:
        table_r = np.asarray(self.r_values)
        table_phi = np.asarray(self.phi_values)
        r_end = float(table_r[-1])
        fn = self._powered(extra_power)

        vals: List[float] = []
        if t <= r_end:
            nodes = np.concatenate([[t], table_r[table_r > t]])
            vals.extend(fn(nodes).tolist())
            if self.interpolation == "step":
                # left limits at each joint above t
                seg = np.flatnonzero(table_r[1:] > t)
                vals.extend((table_phi[seg] * table_r[seg + 1] ** extra_power).tolist())

        start = max(t, r_end)
        if self.zero_tail:
            vals.append(0.0)
        else:
            k = self.kappa_tail + extra_power
            end_val = float(table_phi[-1]) * start ** extra_power * (start / r_end) ** self.kappa_tail
            if mode == "sup":
                vals.append(math.inf if k > 0 else end_val)
            else:
                vals.append(0.0 if k < 0 else end_val)
        return float(max(vals) if mode == "sup" else min(vals))


class Scaled(_Weight):
    family: Literal["scaled"] = "scaled"
    factor: float = Field(ge=0)
    weight: "WeightSpec"

    def evaluate(self, r: np.ndarray) -> np.ndarray:
        return self.factor * self.weight.evaluate(r)

    def tail_law(self) -> TailLaw:
        law = self.weight.tail_law()
        return TailLaw(law.exponent, law.log_power, law.periodic, law.zero or self.factor == 0.0)

    def head_exponent(self) -> float:
        return self.weight.head_exponent()

    def tail_extreme(self, t: float, extra_power: float, mode: str) -> float:
        if self.factor == 0.0:
            return 0.0
        return self.factor * self.weight.tail_extreme(t, extra_power, mode)


WeightSpec = Annotated[
    Union[PowerLaw, PowerLog, OscPower, Tabulated, Scaled],
    Field(discriminator="family"),
]

Scaled.model_rebuild()


def eval_weight(w: WeightSpec, r: float) -> float:
    if not r > 0:
        raise BadRadiusError(f"weights are defined for r > 0, got {r}")
    return float(w.evaluate(np.array([r], dtype=float))[0])


def central_morrey_weight(mu: float, dim: int) -> PowerLaw:
    """Weight r^{μn} under which the local Morrey norm is the central Morrey norm."""
    return PowerLaw(kappa=mu * dim)


# ========================================================================
# RADII
# ========================================================================

class RadiiSet(BaseModel):
    model_config = ConfigDict(frozen=True)

    r_min: float
    r_max: float
    count: int

    @model_validator(mode="after")
    def _check(self) -> "RadiiSet":
        if not (self.r_min > 0 and self.r_max > self.r_min and self.count >= 2):
            raise BadRadiiError(
                f"need 0 < r_min < r_max and count >= 2, got {self.r_min}, {self.r_max}, {self.count}"
            )
        if not math.isfinite(self.r_max):
            raise BadRadiiError("r_max must be finite")
        return self

    @classmethod
    def dyadic(cls, r_min: float, octaves: int, per_octave: int = 1) -> "RadiiSet":
        """Radii r_min·2^{j/per_octave}, j = 0..octaves·per_octave."""
        return cls(r_min=r_min, r_max=r_min * 2.0 ** octaves, count=octaves * per_octave + 1)

    @property
    def values(self) -> np.ndarray:
        # base-2 exponents keep dyadic sets on exact powers of two
        step = math.log2(self.r_max / self.r_min) / (self.count - 1)
        radii = self.r_min * np.exp2(np.arange(self.count) * step)
        radii[-1] = self.r_max
        return radii

    @property
    def log_step(self) -> float:
        return math.log(self.r_max / self.r_min) / (self.count - 1)

    def log_cells(self) -> Tuple[np.ndarray, np.ndarray]:
        """Nodes and dt-weights of the midpoint rule in ln t, one cell per radius."""
        nodes = self.values
        return nodes, nodes * self.log_step

    def in_top_decade(self) -> np.ndarray:
        return self.values >= self.r_max / 10.0


def support_radius(spec: FunctionSpec) -> Optional[float]:
    radius = spec.support_radius()
    return None if math.isinf(radius) else radius
