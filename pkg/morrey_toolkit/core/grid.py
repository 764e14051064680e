# morrey_toolkit/core/grid.py
"""
Uniform cell-centered grids on [-R, R]^dim, midpoint quadrature over balls,
and L_p / weak L_p norms of sampled functions restricted to balls.

Ball membership is decided by the cell center alone. Every per-ball sum runs
over a contiguous copy of the selected values in the fixed cell order, so the
numpy pairwise reduction gives the same bits no matter which thread asks.
"""

import logging
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, field_validator, model_validator

from core.errors import (
    BadConfigError,
    BadExponentError,
    BadRadiusError,
    EmptyQuadratureError,
    GridMismatchError,
)

logger = logging.getLogger(__name__)

Point = Tuple[float, ...]


def ball_volume(dim: int, r: float) -> float:
    """Analytic volume v_n r^n of a ball in dimension 1 or 2."""
    return 2.0 * r if dim == 1 else math.pi * r * r


def lattice_ball_volume(dim: int, spacing: float, r: float) -> float:
    """Volume of the cells of an unbounded lattice whose centers lie within
    distance < r of a cell center."""
    rho = r / spacing
    reach = math.ceil(rho) - 1
    if dim == 1:
        return (2 * reach + 1) * spacing
    a = np.arange(-reach, reach + 1, dtype=float)
    half_chords = np.ceil(np.sqrt(rho * rho - a * a)) - 1.0
    return float(np.sum(2.0 * half_chords + 1.0)) * spacing * spacing


def sphere_area(dim: int) -> float:
    """Unnormalized surface measure of S^{dim-1}: 2 for the two points, 2π for the circle."""
    return 2.0 if dim == 1 else 2.0 * math.pi


class Grid(BaseModel):
    model_config = ConfigDict(frozen=True)

    dim: int
    half_extent: float
    cells: int

    @model_validator(mode="after")
    def _check_shape(self) -> "Grid":
        if self.dim not in (1, 2):
            raise BadConfigError(f"grid dim must be 1 or 2, got {self.dim}")
        if self.cells < 2:
            raise BadConfigError(f"grid needs at least 2 cells per axis, got {self.cells}")
        if not self.half_extent > 0:
            raise BadConfigError(f"half_extent must be positive, got {self.half_extent}")
        return self

    @property
    def spacing(self) -> float:
        return 2.0 * self.half_extent / self.cells

    @property
    def cell_volume(self) -> float:
        return self.spacing ** self.dim

    @property
    def size(self) -> int:
        return self.cells ** self.dim

    @cached_property
    def axis(self) -> np.ndarray:
        h = self.spacing
        axis = -self.half_extent + (np.arange(self.cells) + 0.5) * h
        axis.setflags(write=False)
        return axis

    @cached_property
    def points(self) -> np.ndarray:
        """Cell centers, shape (N^dim, dim), row-major for dim = 2."""
        if self.dim == 1:
            pts = self.axis[:, None].copy()
        else:
            xx, yy = np.meshgrid(self.axis, self.axis, indexing="ij")
            pts = np.stack([xx.ravel(), yy.ravel()], axis=1)
        pts.setflags(write=False)
        return pts

    def contains(self, point: Point) -> bool:
        return all(abs(c) <= self.half_extent for c in point)

    def nearest_index(self, point: Point) -> int:
        """Flat index of the cell whose center is closest to ``point``."""
        if len(point) != self.dim:
            raise BadConfigError(f"point {point} does not have dimension {self.dim}")
        idx = [
            int(np.clip(math.floor((c + self.half_extent) / self.spacing), 0, self.cells - 1))
            for c in point
        ]
        if self.dim == 1:
            return idx[0]
        return idx[0] * self.cells + idx[1]

    def rescaled(self, factor: float) -> "Grid":
        """Same cell count on the box scaled by ``factor``."""
        return Grid(dim=self.dim, half_extent=self.half_extent * factor, cells=self.cells)

    def refined(self, factor: int = 2) -> "Grid":
        return Grid(dim=self.dim, half_extent=self.half_extent, cells=self.cells * factor)


@dataclass(frozen=True)
class GridFunction:
    """Values sampled at the cell centers of ``grid``."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        values = np.ascontiguousarray(self.values, dtype=float).reshape(-1)
        if values.size != self.grid.size:
            raise BadConfigError(
                f"expected {self.grid.size} values for the grid, got {values.size}"
            )
        if not np.all(np.isfinite(values)):
            raise BadConfigError("grid function values must be finite")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @classmethod
    def zeros(cls, grid: Grid) -> "GridFunction":
        return cls(grid, np.zeros(grid.size))

    def same_grid(self, other: "GridFunction") -> None:
        if self.grid != other.grid:
            raise GridMismatchError(f"{self.grid} vs {other.grid}")

    def abs(self) -> "GridFunction":
        return GridFunction(self.grid, np.abs(self.values))

    def scaled(self, factor: float) -> "GridFunction":
        return GridFunction(self.grid, factor * self.values)

    def map(self, fn: Callable[[np.ndarray], np.ndarray]) -> "GridFunction":
        return GridFunction(self.grid, fn(self.values))

    def __add__(self, other: "GridFunction") -> "GridFunction":
        self.same_grid(other)
        return GridFunction(self.grid, self.values + other.values)

    def __sub__(self, other: "GridFunction") -> "GridFunction":
        self.same_grid(other)
        return GridFunction(self.grid, self.values - other.values)

    def __mul__(self, other: "GridFunction") -> "GridFunction":
        self.same_grid(other)
        return GridFunction(self.grid, self.values * other.values)


class BallSpec(BaseModel):
    model_config = ConfigDict(frozen=True)

    center: Point
    radius: float

    @field_validator("radius")
    @classmethod
    def _positive_radius(cls, v: float) -> float:
        if not v > 0:
            raise BadRadiusError(f"ball radius must be positive, got {v}")
        return v


def _box_distance(grid: Grid, center: np.ndarray) -> float:
    """Euclidean distance from ``center`` to the box, 0 inside."""
    excess = np.maximum(np.abs(center) - grid.half_extent, 0.0)
    return float(np.sqrt(np.sum(excess * excess)))


def ball_mask(grid: Grid, ball: BallSpec) -> np.ndarray:
    center = np.asarray(ball.center, dtype=float)
    if center.size != grid.dim:
        raise BadConfigError(f"ball center {ball.center} does not have dimension {grid.dim}")
    if _box_distance(grid, center) >= ball.radius:
        raise EmptyQuadratureError(f"ball {ball.center}, r={ball.radius} misses the grid box")
    diff = grid.points - center
    return np.einsum("ij,ij->i", diff, diff) < ball.radius * ball.radius


def ball_values(f: GridFunction, ball: BallSpec) -> np.ndarray:
    """Contiguous copy of the samples whose cell centers lie in ``ball``."""
    return np.ascontiguousarray(f.values[ball_mask(f.grid, ball)])


def integrate_ball(f: GridFunction, ball: BallSpec) -> float:
    vals = ball_values(f, ball)
    return float(np.sum(vals)) * f.grid.cell_volume


def _check_p(p: float) -> None:
    if not p >= 1:
        raise BadExponentError(f"exponent p must be >= 1, got {p}")


def lp_norm_ball(f: GridFunction, p: float, ball: BallSpec) -> float:
    _check_p(p)
    vals = np.abs(ball_values(f, ball))
    return lp_of_values(vals, p, f.grid.cell_volume)


def lp_of_values(vals: np.ndarray, p: float, cell_volume: float) -> float:
    if vals.size == 0:
        return 0.0
    peak = float(np.max(vals))
    if peak == 0.0:
        return 0.0
    # normalizing by the peak keeps c·f exactly c times the norm for c = 2^k
    if math.isinf(p):
        return peak
    total = float(np.sum((vals / peak) ** p)) * cell_volume
    return total ** (1.0 / p) * peak


def weak_lp_norm_ball(f: GridFunction, p: float, ball: BallSpec) -> float:
    _check_p(p)
    vals = np.abs(ball_values(f, ball))
    if vals.size == 0:
        return 0.0
    peak = float(np.max(vals))
    if peak == 0.0:
        return 0.0
    levels = np.sort(vals / peak)[::-1]
    # level a_k is exceeded (in the limit λ ↑ a_k) by the k+1 largest samples
    counts = np.arange(1, levels.size + 1, dtype=float)
    candidates = levels * (counts * f.grid.cell_volume) ** (1.0 / p)
    weak = float(np.max(candidates)) * peak
    # Chebyshev bound, held bitwise against the rounding of the two formulas
    return min(weak, lp_of_values(vals, p, f.grid.cell_volume))


def truncation_fraction(grid: Grid, ball: BallSpec, angles: int = 720) -> float:
    """Fraction of the analytic ball volume lying outside the grid box."""
    center = np.asarray(ball.center, dtype=float)
    r, big_r = ball.radius, grid.half_extent
    if grid.dim == 1:
        c = float(center[0])
        inside = max(0.0, min(c + r, big_r) - max(c - r, -big_r))
        return max(0.0, 1.0 - inside / (2.0 * r))

    if not grid.contains(tuple(center)):
        measure = float(np.count_nonzero(ball_mask(grid, ball))) * grid.cell_volume
        return float(np.clip(1.0 - measure / ball_volume(2, r), 0.0, 1.0))

    theta = (np.arange(angles) + 0.5) * (2.0 * math.pi / angles)
    u = np.stack([np.cos(theta), np.sin(theta)], axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        reach = np.where(u > 0, (big_r - center) / u, np.where(u < 0, (-big_r - center) / u, np.inf))
    rho = np.minimum(np.min(reach, axis=1), r)
    area = 0.5 * float(np.sum(rho * rho)) * (2.0 * math.pi / angles)
    return max(0.0, 1.0 - area / ball_volume(2, r))
