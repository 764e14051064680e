# morrey_toolkit/core/kernel.py
"""
Rough kernels Ω: degree-zero homogeneous functions given by their values on
the unit sphere. Only cataloged shapes exist; anything else enters through an
angular table.

JSON descriptors look like {"shape": "harmonic", "kind": "cos", "k": 2}.
"""

import logging
import math
from typing import Annotated, Dict, Literal, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from core.config import settings
from core.errors import BadConfigError, BadExponentError, NotADirectionError
from core.grid import sphere_area

logger = logging.getLogger(__name__)


class _Kernel(BaseModel):
    model_config = ConfigDict(frozen=True)

    def values(self, diff: np.ndarray) -> np.ndarray:
        """Ω at the directions of the rows of ``diff`` (shape (M, dim))."""
        raise NotImplementedError

    def sphere_quadrature(self) -> Tuple[np.ndarray, np.ndarray]:
        """Samples of Ω on S^{dim-1} and their surface weights."""
        if self.dim == 1:
            dirs = np.array([[1.0], [-1.0]])
            return self.values(dirs), np.array([1.0, 1.0])
        m = settings.SPHERE_QUADRATURE_POINTS
        theta = (np.arange(m) + 0.5) * (2.0 * math.pi / m)
        dirs = np.stack([np.cos(theta), np.sin(theta)], axis=1)
        return self.values(dirs), np.full(m, 2.0 * math.pi / m)

    def ess_sup(self) -> float:
        vals, _ = self.sphere_quadrature()
        return float(np.max(np.abs(vals)))

    def defect(self) -> float:
        vals, weights = self.sphere_quadrature()
        return float(np.sum(vals * weights))


class ConstantKernel(_Kernel):
    shape: Literal["constant"] = "constant"
    dim: Literal[1, 2] = 2
    c: float = 1.0

    def values(self, diff: np.ndarray) -> np.ndarray:
        return np.full(diff.shape[0], self.c)

    def ess_sup(self) -> float:
        return abs(self.c)

    def defect(self) -> float:
        return self.c * sphere_area(self.dim)


class SignPairKernel(_Kernel):
    shape: Literal["sign_pair"] = "sign_pair"
    dim: Literal[1] = 1
    a_plus: float
    a_minus: float

    def values(self, diff: np.ndarray) -> np.ndarray:
        return np.where(diff[:, 0] > 0, self.a_plus, self.a_minus)

    def ess_sup(self) -> float:
        return max(abs(self.a_plus), abs(self.a_minus))

    def defect(self) -> float:
        return self.a_plus + self.a_minus


class HarmonicKernel(_Kernel):
    shape: Literal["harmonic"] = "harmonic"
    dim: Literal[2] = 2
    kind: Literal["cos", "sin"] = "cos"
    k: int = Field(default=1, ge=1)
    absolute: bool = False

    def values(self, diff: np.ndarray) -> np.ndarray:
        theta = np.arctan2(diff[:, 1], diff[:, 0])
        out = np.cos(self.k * theta) if self.kind == "cos" else np.sin(self.k * theta)
        return np.abs(out) if self.absolute else out

    def ess_sup(self) -> float:
        return 1.0

    def defect(self) -> float:
        if self.absolute:
            return super().defect()
        # full periods integrate to zero
        return 0.0


class AngularTableKernel(_Kernel):
    shape: Literal["angular_table"] = "angular_table"
    dim: Literal[2] = 2
    values_table: Tuple[float, ...] = Field(alias="values")

    model_config = ConfigDict(frozen=True, populate_by_name=True)

    @model_validator(mode="after")
    def _check_table(self) -> "AngularTableKernel":
        if len(self.values_table) < 4:
            raise BadConfigError(f"angular table needs at least 4 cells, got {len(self.values_table)}")
        if not all(math.isfinite(v) for v in self.values_table):
            raise BadConfigError("angular table values must be finite")
        return self

    def values(self, diff: np.ndarray) -> np.ndarray:
        table = np.asarray(self.values_table)
        m = table.size
        theta = np.mod(np.arctan2(diff[:, 1], diff[:, 0]), 2.0 * math.pi)
        idx = np.minimum((theta / (2.0 * math.pi / m)).astype(int), m - 1)
        return table[idx]

    def sphere_quadrature(self) -> Tuple[np.ndarray, np.ndarray]:
        table = np.asarray(self.values_table)
        return table, np.full(table.size, 2.0 * math.pi / table.size)


RoughKernel = Annotated[
    Union[ConstantKernel, SignPairKernel, HarmonicKernel, AngularTableKernel],
    Field(discriminator="shape"),
]


def eval_kernel(k: RoughKernel, direction: Sequence[float]) -> float:
    d = np.asarray(direction, dtype=float).reshape(-1)
    if d.size != k.dim or abs(float(np.linalg.norm(d)) - 1.0) > 1e-9:
        raise NotADirectionError(f"{tuple(d)} is not a unit vector in dimension {k.dim}")
    return float(k.values(d[None, :])[0])


def sphere_lnorm(k: RoughKernel, s: float) -> float:
    """‖Ω‖_{L_s(S^{n-1})} with the unnormalized surface measure."""
    if not s > 1:
        raise BadExponentError(f"sphere exponent s must exceed 1, got {s}")
    if math.isinf(s):
        return k.ess_sup()
    vals, weights = k.sphere_quadrature()
    return float(np.sum(np.abs(vals) ** s * weights)) ** (1.0 / s)


def cancellation_defect(k: RoughKernel) -> float:
    return k.defect()


def spherical_mean(k: RoughKernel) -> float:
    return cancellation_defect(k) / sphere_area(k.dim)


def absolute(k: RoughKernel) -> RoughKernel:
    """The kernel |Ω|."""
    if isinstance(k, ConstantKernel):
        return ConstantKernel(dim=k.dim, c=abs(k.c))
    if isinstance(k, SignPairKernel):
        return SignPairKernel(a_plus=abs(k.a_plus), a_minus=abs(k.a_minus))
    if isinstance(k, HarmonicKernel):
        return HarmonicKernel(kind=k.kind, k=k.k, absolute=True)
    return AngularTableKernel(values=tuple(abs(v) for v in k.values_table))


def dual_exponent(s: float) -> float:
    """s' = s/(s-1), with ∞' = 1."""
    if math.isinf(s):
        return 1.0
    return s / (s - 1.0)


class KernelInfo(BaseModel):
    shape: str
    dim: int
    sphere_norms: Dict[str, float]
    cancellation_defect: float
    spherical_mean: float
    cancelling: bool


def kernel_info(k: RoughKernel, s_values: Sequence[float] = (2.0, 4.0, math.inf)) -> KernelInfo:
    norms = {("inf" if math.isinf(s) else repr(float(s))): sphere_lnorm(k, s) for s in s_values}
    defect = cancellation_defect(k)
    logger.info(f"🧭 Kernel {k.shape} (dim={k.dim}): defect={defect:.3e}")
    return KernelInfo(
        shape=k.shape,
        dim=k.dim,
        sphere_norms=norms,
        cancellation_defect=defect,
        spherical_mean=defect / sphere_area(k.dim),
        cancelling=abs(defect) < 1e-8,
    )
