# morrey_toolkit/services/operator_service.py
"""
Direct-summation evaluation of the rough-kernel operators on a grid:
fractional integral, fractional maximal function, their commutators, the
Marcinkiewicz square function and the heat-semigroup potential.

Every operator is evaluated at an explicit set of cell centers, costing
O(N^dim) per point. Points are independent, so they may be farmed out to a
thread pool; each point's sum is computed the same way regardless.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator
from scipy import special

from core.catalog import RadiiSet
from core.config import settings
from core.errors import (
    BadAlphaError,
    BadConfigError,
    BadExponentError,
    BadLambdaError,
    KernelNotCancellingError,
)
from core.grid import Grid, GridFunction, Point, ball_volume, lattice_ball_volume
from core.kernel import RoughKernel, absolute, cancellation_defect, dual_exponent, spherical_mean

logger = logging.getLogger(__name__)

RELATION_TOL = 1e-12


# ========================================================================
# PARAMETERS
# ========================================================================

class OperatorParams(BaseModel):
    """Exponent bundle; each relation is enforced once its fields are set."""

    model_config = ConfigDict(frozen=True, populate_by_name=True)

    dim: int = 1
    alpha: float
    p: Optional[float] = None
    q: Optional[float] = None
    s: Optional[float] = None
    p1: Optional[float] = None
    p2: Optional[float] = None
    q1: Optional[float] = None
    lambda_c: float = Field(default=0.0, alias="lambda")

    @model_validator(mode="after")
    def _check_relations(self) -> "OperatorParams":
        n, a = self.dim, self.alpha
        if n not in (1, 2):
            raise BadConfigError(f"dim must be 1 or 2, got {n}")
        if not 0 <= a < n:
            raise BadAlphaError(f"alpha must lie in [0, {n}), got {a}")

        if self.p is not None:
            if self.p < 1:
                raise BadExponentError(f"p must be >= 1, got {self.p}")
            if a > 0 and not self.p < n / a:
                raise BadExponentError(f"p must be below n/alpha = {n / a:g}, got {self.p}")
        if self.q is not None and self.p is not None:
            if abs(1.0 / self.q - (1.0 / self.p - a / n)) > RELATION_TOL:
                raise BadExponentError(f"1/q = 1/p - alpha/n fails for p={self.p}, q={self.q}")
        if self.p1 is not None and self.p2 is not None and self.p is not None:
            if abs(1.0 / self.p - 1.0 / self.p1 - 1.0 / self.p2) > RELATION_TOL:
                raise BadExponentError("1/p = 1/p1 + 1/p2 fails")
        if self.q1 is not None and self.p1 is not None:
            if abs(1.0 / self.q1 - (1.0 / self.p1 - a / n)) > RELATION_TOL:
                raise BadExponentError("1/q1 = 1/p1 - alpha/n fails")
        if self.s is not None and not self.s > 1:
            raise BadExponentError(f"kernel exponent s must exceed 1, got {self.s}")
        if not 0 <= self.lambda_c < 1.0 / n:
            raise BadLambdaError(f"lambda must lie in [0, 1/n), got {self.lambda_c}")
        return self

    @classmethod
    def from_exponents(cls, dim: int, alpha: float, p: float, **extra) -> "OperatorParams":
        """Fill in q from the Sobolev relation 1/q = 1/p - alpha/n."""
        q = 1.0 / (1.0 / p - alpha / dim)
        return cls(dim=dim, alpha=alpha, p=p, q=q, **extra)

    @property
    def target_q(self) -> float:
        if self.q is not None:
            return self.q
        if self.p is None:
            raise BadExponentError("neither q nor p is set")
        return 1.0 / (1.0 / self.p - self.alpha / self.dim)

    @property
    def rough_admissible(self) -> bool:
        """(s' <= p) or (q < s); an unset s means s = ∞."""
        s = math.inf if self.s is None else self.s
        if self.p is None:
            return True
        return dual_exponent(s) <= self.p or self.target_q < s


def _require_positive_alpha(alpha: float, dim: int) -> None:
    if not 0 < alpha < dim:
        raise BadAlphaError(f"alpha must lie in (0, {dim}), got {alpha}")


def _require_kernel_dim(k: RoughKernel, grid: Grid) -> None:
    if k.dim != grid.dim:
        raise BadConfigError(f"kernel dim {k.dim} does not match grid dim {grid.dim}")


def riesz_constant(dim: int, alpha: float) -> float:
    """c_{n,α} = Γ((n-α)/2) / (2^α π^{n/2} Γ(α/2)), the heat-semigroup normalization."""
    return float(special.gamma((dim - alpha) / 2.0) / (2.0 ** alpha * math.pi ** (dim / 2.0) * special.gamma(alpha / 2.0)))


# ========================================================================
# EVALUATION POINTS & RESULTS
# ========================================================================

@dataclass(frozen=True)
class EvalPoints:
    """Flat cell indices at which an operator is evaluated."""

    grid: Grid
    indices: np.ndarray

    def __post_init__(self):
        idx = np.asarray(self.indices, dtype=int).reshape(-1)
        if idx.size == 0:
            raise BadConfigError("no evaluation points")
        if idx.min() < 0 or idx.max() >= self.grid.size:
            raise BadConfigError("evaluation index outside the grid")
        idx.setflags(write=False)
        object.__setattr__(self, "indices", idx)

    def __len__(self) -> int:
        return int(self.indices.size)

    @property
    def coords(self) -> np.ndarray:
        return np.asarray(self.grid.points)[self.indices]

    @classmethod
    def diameter(cls, grid: Grid, count: int = 65) -> "EvalPoints":
        cols = np.unique(np.round(np.linspace(0, grid.cells - 1, count)).astype(int))
        if grid.dim == 1:
            return cls(grid, cols)
        return cls(grid, (grid.cells // 2) * grid.cells + cols)

    @classmethod
    def subgrid(cls, grid: Grid, per_axis: int = 8) -> "EvalPoints":
        if grid.dim == 1:
            return cls.diameter(grid, per_axis)
        axis = np.round(np.linspace(0, grid.cells - 1, per_axis + 2)[1:-1]).astype(int)
        ii, jj = np.meshgrid(axis, axis, indexing="ij")
        return cls(grid, (ii * grid.cells + jj).ravel())

    @classmethod
    def at(cls, grid: Grid, coords: Sequence[Point]) -> "EvalPoints":
        """Snap each coordinate to the nearest cell center."""
        return cls(grid, np.array([grid.nearest_index(tuple(c)) for c in coords]))

    @classmethod
    def ball(cls, grid: Grid, center: Point, radius: float) -> "EvalPoints":
        diff = np.asarray(grid.points) - np.asarray(center, dtype=float)
        inside = np.flatnonzero(np.einsum("ij,ij->i", diff, diff) < radius * radius)
        return cls(grid, inside)

    @classmethod
    def all(cls, grid: Grid) -> "EvalPoints":
        return cls(grid, np.arange(grid.size))


@dataclass(frozen=True)
class OperatorResult:
    """Operator values at ``points`` (sparse), with optional truncation estimates."""

    name: str
    points: EvalPoints
    values: np.ndarray
    tail_bound: Optional[np.ndarray] = None

    def dense(self) -> GridFunction:
        """Grid function equal to the values at the points and 0 elsewhere."""
        full = np.zeros(self.points.grid.size)
        full[self.points.indices] = self.values
        return GridFunction(self.points.grid, full)


def default_t_grid(grid: Grid) -> RadiiSet:
    """t ∈ [h, 4R] with DEFAULT_T_POINTS log-spaced points."""
    return RadiiSet(r_min=grid.spacing, r_max=4.0 * grid.half_extent, count=settings.DEFAULT_T_POINTS)


def default_heat_times(grid: Grid) -> RadiiSet:
    """Heat times t ∈ [h², (4R)²]; heat time carries units of length²."""
    return RadiiSet(
        r_min=grid.spacing ** 2,
        r_max=(4.0 * grid.half_extent) ** 2,
        count=settings.DEFAULT_T_POINTS,
    )


def self_cell_integral(grid: Grid, exponent: float) -> float:
    """∫ over the self cell of |u|^{exponent-n} du (dim 2 uses the disk of equal area)."""
    h = grid.spacing
    if grid.dim == 1:
        return 2.0 * (h / 2.0) ** exponent / exponent
    return 2.0 * math.pi * (h / math.sqrt(math.pi)) ** exponent / exponent


def _map_points(fn: Callable[[int], object], points: EvalPoints, threads: Optional[int]) -> list:
    threads = threads or settings.THREADS
    if threads <= 1 or len(points) == 1:
        return [fn(int(i)) for i in points.indices]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, (int(i) for i in points.indices)))


def _geometry(grid: Grid, i: int):
    """Displacements x_i - y and distances for all cells y."""
    pts = np.asarray(grid.points)
    diff = pts[i] - pts
    dist = np.sqrt(np.einsum("ij,ij->i", diff, diff))
    return diff, dist


# ========================================================================
# FRACTIONAL INTEGRALS
# ========================================================================

def _potential(
    grid: Grid,
    k: RoughKernel,
    alpha: float,
    points: EvalPoints,
    density: Callable[[int], np.ndarray],
    threads: Optional[int],
) -> np.ndarray:
    """Σ_y Ω(x-y)|x-y|^{α-n} ρ_x(y) h^n with the analytic self-cell term."""
    n, vol = grid.dim, grid.cell_volume
    self_weight = spherical_mean(k) * self_cell_integral(grid, alpha)

    def at(i: int) -> float:
        diff, dist = _geometry(grid, i)
        dist[i] = 1.0
        kern = k.values(diff) * dist ** (alpha - n)
        kern[i] = 0.0
        rho = density(i)
        return float(np.sum(kern * rho)) * vol + self_weight * float(rho[i])

    return np.array(_map_points(at, points, threads))


def riesz_rough(
    f: GridFunction,
    k: RoughKernel,
    params: OperatorParams,
    points: EvalPoints,
    threads: Optional[int] = None,
) -> OperatorResult:
    _require_positive_alpha(params.alpha, f.grid.dim)
    _require_kernel_dim(k, f.grid)
    logger.info(f"⚙️ I_(Ω,α) with α={params.alpha:g} at {len(points)} points")
    values = _potential(f.grid, k, params.alpha, points, lambda i: f.values, threads)
    return OperatorResult("riesz", points, values)


def riesz_of_absolute(
    f: GridFunction,
    k: RoughKernel,
    alpha: float,
    points: EvalPoints,
    threads: Optional[int] = None,
) -> OperatorResult:
    """I_{|Ω|,α}(|f|), the common dominating function of the pointwise bounds."""
    _require_positive_alpha(alpha, f.grid.dim)
    mod = np.abs(f.values)
    values = _potential(f.grid, absolute(k), alpha, points, lambda i: mod, threads)
    return OperatorResult("riesz_abs", points, values)


def commutator_riesz(
    b: GridFunction,
    f: GridFunction,
    k: RoughKernel,
    params: OperatorParams,
    points: EvalPoints,
    threads: Optional[int] = None,
) -> OperatorResult:
    b.same_grid(f)
    _require_positive_alpha(params.alpha, f.grid.dim)
    _require_kernel_dim(k, f.grid)
    bv, fv = b.values, f.values
    logger.info(f"⚙️ [b, I_(Ω,α)] with α={params.alpha:g} at {len(points)} points")
    values = _potential(f.grid, k, params.alpha, points, lambda i: (bv[i] - bv) * fv, threads)
    return OperatorResult("commutator_riesz", points, values)


def commutator_dominant(
    b: GridFunction,
    f: GridFunction,
    k: RoughKernel,
    alpha: float,
    points: EvalPoints,
    threads: Optional[int] = None,
) -> OperatorResult:
    """I_{|Ω|,α}(|b(x) - b(·)||f|) evaluated at each x."""
    b.same_grid(f)
    _require_positive_alpha(alpha, f.grid.dim)
    bv, fv = b.values, np.abs(f.values)
    values = _potential(f.grid, absolute(k), alpha, points, lambda i: np.abs(bv[i] - bv) * fv, threads)
    return OperatorResult("commutator_dominant", points, values)


# ========================================================================
# MAXIMAL OPERATORS
# ========================================================================

def _radial_max(
    grid: Grid,
    alpha: float,
    points: EvalPoints,
    radii: RadiiSet,
    weights: Callable[[int], np.ndarray],
    threads: Optional[int],
) -> np.ndarray:
    """max_t |B(x,t)|^{α/n-1} Σ_{|x-y|<t} w_x(y) h^n.

    |B(x,t)| is the larger of the analytic volume and the volume of the cells
    the ball captures, so averages never exceed the largest weight.
    """
    n, vol = grid.dim, grid.cell_volume
    ts = radii.values
    volumes = [max(ball_volume(n, t), lattice_ball_volume(n, grid.spacing, t)) for t in ts]
    scale = np.array(volumes) ** (alpha / n - 1.0)

    def at(i: int) -> float:
        _, dist = _geometry(grid, i)
        order = np.argsort(dist, kind="stable")
        sorted_dist = dist[order]
        partial = np.concatenate([[0.0], np.cumsum(weights(i)[order])])
        inside = np.searchsorted(sorted_dist, ts, side="left")
        return float(np.max(scale * partial[inside] * vol))

    return np.array(_map_points(at, points, threads))


def maximal_rough(
    f: GridFunction,
    k: RoughKernel,
    params: OperatorParams,
    points: EvalPoints,
    radii: Optional[RadiiSet] = None,
    threads: Optional[int] = None,
) -> OperatorResult:
    _require_kernel_dim(k, f.grid)
    radii = radii or default_t_grid(f.grid)
    mod_f = np.abs(f.values)
    self_weight = spherical_mean(absolute(k))

    def weights(i: int) -> np.ndarray:
        diff, _ = _geometry(f.grid, i)
        w = np.abs(k.values(diff)) * mod_f
        w[i] = self_weight * mod_f[i]
        return w

    logger.info(f"⚙️ M_(Ω,α) with α={params.alpha:g} over {radii.count} radii")
    values = _radial_max(f.grid, params.alpha, points, radii, weights, threads)
    return OperatorResult("maximal", points, values)


def commutator_maximal(
    b: GridFunction,
    f: GridFunction,
    k: RoughKernel,
    params: OperatorParams,
    points: EvalPoints,
    radii: Optional[RadiiSet] = None,
    threads: Optional[int] = None,
) -> OperatorResult:
    b.same_grid(f)
    _require_kernel_dim(k, f.grid)
    radii = radii or default_t_grid(f.grid)
    bv, mod_f = b.values, np.abs(f.values)

    def weights(i: int) -> np.ndarray:
        diff, _ = _geometry(f.grid, i)
        w = np.abs(k.values(diff)) * np.abs(bv[i] - bv) * mod_f
        w[i] = 0.0
        return w

    logger.info(f"⚙️ M_(Ω,b,α) with α={params.alpha:g} over {radii.count} radii")
    values = _radial_max(f.grid, params.alpha, points, radii, weights, threads)
    return OperatorResult("commutator_maximal", points, values)


# ========================================================================
# MARCINKIEWICZ
# ========================================================================

def _require_cancelling(k: RoughKernel) -> None:
    defect = cancellation_defect(k)
    if abs(defect) >= 1e-8:
        raise KernelNotCancellingError(f"∫Ω dσ = {defect:.3e}, the square function needs 0")


def _square_function(
    grid: Grid,
    alpha: float,
    points: EvalPoints,
    t_grid: RadiiSet,
    amplitudes: Callable[[int], np.ndarray],
    threads: Optional[int],
) -> OperatorResult:
    """(Σ_j |F_{t_j}|² / t_j² Δ)^{1/2} with F_t = Σ_{|x-y|≤t} a_x(y)."""
    ts = t_grid.values
    step = t_grid.log_step

    def at(i: int):
        _, dist = _geometry(grid, i)
        order = np.argsort(dist, kind="stable")
        partial = np.concatenate([[0.0], np.cumsum(amplitudes(i)[order])])
        f_t = partial[np.searchsorted(dist[order], ts, side="right")]
        mu2 = float(np.sum(f_t * f_t / (ts * ts))) * step
        upper = f_t[-1] ** 2 / (2.0 * ts[-1] ** 2)
        lower = f_t[0] ** 2 / (2.0 * (alpha + 1.0) * ts[0] ** 2)
        mu = math.sqrt(mu2)
        return mu, math.sqrt(mu2 + upper + lower) - mu

    pairs = _map_points(at, points, threads)
    return OperatorResult(
        "marcinkiewicz",
        points,
        np.array([p[0] for p in pairs]),
        np.array([p[1] for p in pairs]),
    )


def marcinkiewicz(
    f: GridFunction,
    k: RoughKernel,
    params: OperatorParams,
    points: EvalPoints,
    t_grid: Optional[RadiiSet] = None,
    threads: Optional[int] = None,
) -> OperatorResult:
    _require_kernel_dim(k, f.grid)
    _require_cancelling(k)
    grid, alpha = f.grid, params.alpha
    t_grid = t_grid or default_t_grid(grid)
    n, vol = grid.dim, grid.cell_volume
    self_weight = spherical_mean(k) * self_cell_integral(grid, alpha + 1.0)
    fv = f.values

    def amplitudes(i: int) -> np.ndarray:
        diff, dist = _geometry(grid, i)
        dist[i] = 1.0
        a = k.values(diff) * dist ** (alpha + 1.0 - n) * fv * vol
        a[i] = self_weight * fv[i]
        return a

    logger.info(f"⚙️ μ_(Ω,α) with α={alpha:g} over {t_grid.count} scales")
    return _square_function(grid, alpha, points, t_grid, amplitudes, threads)


def commutator_marcinkiewicz(
    b: GridFunction,
    f: GridFunction,
    k: RoughKernel,
    params: OperatorParams,
    points: EvalPoints,
    t_grid: Optional[RadiiSet] = None,
    threads: Optional[int] = None,
) -> OperatorResult:
    b.same_grid(f)
    _require_kernel_dim(k, f.grid)
    _require_cancelling(k)
    grid, alpha = f.grid, params.alpha
    t_grid = t_grid or default_t_grid(grid)
    n, vol = grid.dim, grid.cell_volume
    bv, fv = b.values, f.values

    def amplitudes(i: int) -> np.ndarray:
        diff, dist = _geometry(grid, i)
        dist[i] = 1.0
        a = k.values(diff) * dist ** (alpha + 1.0 - n) * (bv[i] - bv) * fv * vol
        a[i] = 0.0
        return a

    logger.info(f"⚙️ [b, μ_(Ω,α)] with α={alpha:g} over {t_grid.count} scales")
    result = _square_function(grid, alpha, points, t_grid, amplitudes, threads)
    return OperatorResult("commutator_marcinkiewicz", points, result.values, result.tail_bound)


# ========================================================================
# HEAT SEMIGROUP
# ========================================================================

def semigroup_potential(
    f: GridFunction,
    alpha: float,
    points: EvalPoints,
    t_grid: Optional[RadiiSet] = None,
    threads: Optional[int] = None,
) -> OperatorResult:
    """(-Δ)^{-α/2} f = Γ(α/2)^{-1} ∫_0^∞ e^{tΔ}f t^{α/2-1} dt.

    The midpoint rule in ln t covers the cells around ``t_grid``; below the
    first cell e^{tΔ}f ≈ f(x), above the last one e^{tΔ}f(x) decays like t^{-n/2}.
    """
    grid = f.grid
    n = grid.dim
    _require_positive_alpha(alpha, n)
    t_grid = t_grid or default_heat_times(grid)
    ts = t_grid.values
    step = t_grid.log_step
    t_low, t_high = ts[0] * math.exp(-step / 2.0), ts[-1] * math.exp(step / 2.0)
    half = alpha / 2.0
    norm = 1.0 / special.gamma(half)
    reach2 = settings.HEAT_CUTOFF ** 2 * ts
    vol, fv = grid.cell_volume, f.values

    def at(i: int):
        _, dist = _geometry(grid, i)
        d2 = dist * dist
        expo = -d2[None, :] / (4.0 * ts[:, None])
        kern = np.where(d2[None, :] <= reach2[:, None], np.exp(expo), 0.0)
        heat = (4.0 * math.pi * ts) ** (-n / 2.0) * np.sum(kern * fv, axis=1) * vol
        body = float(np.sum(heat * ts ** half)) * step
        lower = float(fv[i]) * t_low ** half / half
        u_high = float(heat[-1]) * (ts[-1] / t_high) ** (n / 2.0)
        upper = u_high * t_high ** half * 2.0 / (n - alpha)
        return norm * (body + lower + upper), norm * (abs(lower) + abs(upper))

    logger.info(f"⚙️ (-Δ)^(-α/2) with α={alpha:g} over {t_grid.count} heat times")
    pairs = _map_points(at, points, threads)
    return OperatorResult(
        "semigroup",
        points,
        np.array([p[0] for p in pairs]),
        np.array([p[1] for p in pairs]),
    )


# ========================================================================
# DISPATCH
# ========================================================================

OPERATORS = (
    "riesz",
    "maximal",
    "commutator_riesz",
    "commutator_maximal",
    "marcinkiewicz",
    "commutator_marcinkiewicz",
    "semigroup",
)


def apply_operator(
    name: str,
    f: GridFunction,
    k: RoughKernel,
    params: OperatorParams,
    points: EvalPoints,
    b: Optional[GridFunction] = None,
    t_grid: Optional[RadiiSet] = None,
    threads: Optional[int] = None,
) -> OperatorResult:
    """Evaluate the operator called ``name``; commutators need the symbol ``b``."""
    if name not in OPERATORS:
        raise BadConfigError(f"unknown operator '{name}'")
    if name.startswith("commutator") and b is None:
        raise BadConfigError(f"operator '{name}' needs a symbol b")

    if name == "riesz":
        return riesz_rough(f, k, params, points, threads)
    if name == "maximal":
        return maximal_rough(f, k, params, points, t_grid, threads)
    if name == "commutator_riesz":
        return commutator_riesz(b, f, k, params, points, threads)
    if name == "commutator_maximal":
        return commutator_maximal(b, f, k, params, points, t_grid, threads)
    if name == "marcinkiewicz":
        return marcinkiewicz(f, k, params, points, t_grid, threads)
    if name == "commutator_marcinkiewicz":
        return commutator_marcinkiewicz(b, f, k, params, points, t_grid, threads)
    return semigroup_potential(f, params.alpha, points, t_grid, threads)
