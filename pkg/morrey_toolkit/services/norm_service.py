# morrey_toolkit/services/norm_service.py
"""
Space norms on sampled functions: generalized local/global Morrey and their
weak versions, the Beurling space B_q and algebra A_q, and the central
Campanato seminorm CBMO_{q,λ} with its two-radius oscillation gap.

Every sup over r > 0 becomes a max over a declared RadiiSet. The result keeps
the whole per-radius table and says whether the max sat on an end of the range.
"""

import logging
import math
from typing import List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel

from core.catalog import RadiiSet, WeightSpec, eval_weight
from core.config import settings
from core.errors import BadExponentError, BadLambdaError, BadRangeError
from core.grid import (
    BallSpec,
    GridFunction,
    Point,
    ball_values,
    ball_volume,
    lp_norm_ball,
    lp_of_values,
    truncation_fraction,
    weak_lp_norm_ball,
)

logger = logging.getLogger(__name__)


# ========================================================================
# RESULT MODELS
# ========================================================================

class RadiusTerm(BaseModel):
    radius: float
    term: float
    center: Optional[Point] = None


class NormResult(BaseModel):
    kind: str
    value: float
    argmax_radius: Optional[float] = None
    argmax_center: Optional[Point] = None
    per_radius: List[RadiusTerm]
    boundary_hit: bool = False
    truncated_radii: List[float] = []


class AlgebraNormResult(BaseModel):
    value: float
    remainder_bound: float
    terms: List[RadiusTerm]


def sentinel(term: float) -> float:
    """Terms beyond INFINITY_SENTINEL are reported as +∞."""
    return math.inf if term > settings.INFINITY_SENTINEL else term


def _ratio(numerator: float, denominator: float) -> float:
    if denominator == 0.0:
        return 0.0 if numerator == 0.0 else math.inf
    return sentinel(numerator / denominator)


def _assemble(kind: str, rows: List[RadiusTerm], truncated: List[float], radii_count: int) -> NormResult:
    terms = np.array([row.term for row in rows])
    best = int(np.argmax(terms))
    position = best % radii_count
    result = NormResult(
        kind=kind,
        value=float(terms[best]),
        argmax_radius=rows[best].radius,
        argmax_center=rows[best].center,
        per_radius=rows,
        boundary_hit=position in (0, radii_count - 1) and terms[best] > 0,
        truncated_radii=truncated,
    )
    if result.boundary_hit:
        logger.warning(f"⚠️ {kind}: sup attained at the end of the radii range (r={result.argmax_radius:g})")
    return result


def _check_p(p: float) -> None:
    if not p >= 1:
        raise BadExponentError(f"exponent must be >= 1, got {p}")


# ========================================================================
# MORREY
# ========================================================================

def _morrey_rows(
    f: GridFunction,
    p: float,
    w: WeightSpec,
    center: Point,
    radii: RadiiSet,
    weak: bool,
    truncated: List[float],
) -> List[RadiusTerm]:
    n = f.grid.dim
    ball_norm = weak_lp_norm_ball if weak else lp_norm_ball
    rows = []
    for r in radii.values:
        ball = BallSpec(center=tuple(center), radius=float(r))
        numerator = ball_norm(f, p, ball)
        denominator = eval_weight(w, float(r)) * ball_volume(n, float(r)) ** (1.0 / p)
        rows.append(RadiusTerm(radius=float(r), term=_ratio(numerator, denominator), center=tuple(center)))
        if truncation_fraction(f.grid, ball) > 0 and float(r) not in truncated:
            truncated.append(float(r))
    return rows


def local_morrey_norm(
    f: GridFunction,
    p: float,
    w: WeightSpec,
    x0: Point,
    radii: RadiiSet,
    weak: bool = False,
) -> NormResult:
    """max_r φ(r)^{-1} |B(x0,r)|^{-1/p} ‖f‖_{L_p(B(x0,r))} (weak L_p when ``weak``)."""
    _check_p(p)
    truncated: List[float] = []
    rows = _morrey_rows(f, p, w, x0, radii, weak, truncated)
    if truncated:
        logger.warning(f"⚠️ {len(truncated)} balls reach past the grid box (largest r={max(truncated):g})")
    kind = "weak_local_morrey" if weak else "local_morrey"
    return _assemble(kind, rows, truncated, radii.count)


def weak_local_morrey_norm(
    f: GridFunction,
    p: float,
    w: WeightSpec,
    x0: Point,
    radii: RadiiSet,
) -> NormResult:
    return local_morrey_norm(f, p, w, x0, radii, weak=True)


def global_morrey_norm(
    f: GridFunction,
    p: float,
    w: WeightSpec,
    centers: Sequence[Point],
    radii: RadiiSet,
    weak: bool = False,
) -> NormResult:
    """Max over centers × radii of the Morrey term."""
    _check_p(p)
    truncated: List[float] = []
    rows: List[RadiusTerm] = []
    for center in centers:
        rows.extend(_morrey_rows(f, p, w, tuple(center), radii, weak, truncated))
    kind = "weak_global_morrey" if weak else "global_morrey"
    return _assemble(kind, rows, truncated, radii.count)


def classical_local_morrey_norm(
    f: GridFunction,
    p: float,
    lam: float,
    x0: Point,
    radii: RadiiSet,
) -> float:
    """sup_r (r^{-λ} ∫_{B(x0,r)} |f|^p)^{1/p}, computed directly from the samples."""
    _check_p(p)
    pts = np.asarray(f.grid.points)
    dist2 = np.sum((pts - np.asarray(x0, dtype=float)) ** 2, axis=1)
    best = 0.0
    for r in radii.values:
        inside = np.abs(f.values[dist2 < r * r])
        mass = float(np.sum(inside ** p)) * f.grid.cell_volume
        best = max(best, (r ** (-lam) * mass) ** (1.0 / p))
    return best


# ========================================================================
# BEURLING
# ========================================================================

def _annulus_values(f: GridFunction, k: int, unit_ball: bool) -> np.ndarray:
    r = np.sqrt(np.sum(np.asarray(f.grid.points) ** 2, axis=1))
    if unit_ball:
        mask = r <= 1.0
    else:
        mask = (r > 2.0 ** (k - 1)) & (r <= 2.0 ** k)
    return np.ascontiguousarray(np.abs(f.values[mask]))


def beurling_profile(
    f: GridFunction,
    q: float,
    homogeneous: bool,
    k_range: Tuple[int, int],
) -> NormResult:
    """Per-annulus terms 2^{-kn/q}‖fχ_k‖_q for k in ``k_range`` (inclusive)."""
    _check_p(q)
    k_min, k_max = k_range
    if k_min > k_max:
        raise BadRangeError(f"empty k range [{k_min}, {k_max}]")
    if not homogeneous and k_min < 0:
        raise BadRangeError("the inhomogeneous space uses k >= 0")
    n = f.grid.dim
    rows = []
    for k in range(k_min, k_max + 1):
        vals = _annulus_values(f, k, unit_ball=(not homogeneous and k == 0))
        norm = lp_of_values(vals, q, f.grid.cell_volume)
        rows.append(RadiusTerm(radius=2.0 ** k, term=sentinel(2.0 ** (-k * n / q) * norm)))
    kind = "homogeneous_beurling" if homogeneous else "beurling"
    return _assemble(kind, rows, [], len(rows))


def beurling_norm(
    f: GridFunction,
    q: float,
    homogeneous: bool,
    k_range: Tuple[int, int],
) -> float:
    return beurling_profile(f, q, homogeneous, k_range).value


def _algebra_sum(f: GridFunction, q: float, ks: range, homogeneous: bool) -> AlgebraNormResult:
    if not q > 1:
        raise BadExponentError(f"the Beurling algebra needs q > 1, got {q}")
    n = f.grid.dim
    q_dual = q / (q - 1.0)
    terms = []
    for k in ks:
        vals = _annulus_values(f, k, unit_ball=(not homogeneous and k == 0))
        norm = lp_of_values(vals, q, f.grid.cell_volume)
        terms.append(RadiusTerm(radius=2.0 ** k, term=2.0 ** (-k * n / q_dual) * norm))
    value = float(sum(t.term for t in terms))
    # annuli past the box corner carry no samples
    corner = f.grid.half_extent * math.sqrt(n)
    remainder = 0.0 if 2.0 ** ks[-1] >= corner else terms[-1].term
    return AlgebraNormResult(value=sentinel(value), remainder_bound=remainder, terms=terms)


def beurling_algebra_norm(f: GridFunction, q: float, k_max: int) -> AlgebraNormResult:
    """Σ_{k=0}^{k_max} 2^{-kn/q'}‖fχ_k‖_q, χ_0 the unit ball."""
    if k_max < 0:
        raise BadRangeError(f"k_max must be >= 0, got {k_max}")
    return _algebra_sum(f, q, range(0, k_max + 1), homogeneous=False)


def homogeneous_beurling_algebra_norm(f: GridFunction, q: float, k_range: Tuple[int, int]) -> AlgebraNormResult:
    k_min, k_max = k_range
    if k_min > k_max:
        raise BadRangeError(f"empty k range [{k_min}, {k_max}]")
    return _algebra_sum(f, q, range(k_min, k_max + 1), homogeneous=True)


# ========================================================================
# CENTRAL CAMPANATO
# ========================================================================

def _check_cbmo(b: GridFunction, q: float, lambda_c: float) -> None:
    _check_p(q)
    if not 0 <= lambda_c < 1.0 / b.grid.dim:
        raise BadLambdaError(f"lambda must lie in [0, 1/{b.grid.dim}), got {lambda_c}")


def oscillation_gap(
    b: GridFunction,
    q: float,
    lambda_c: float,
    x0: Point,
    r1: float,
    r2: float,
) -> float:
    """(|B(x0,r1)|^{-1-λq} ∫_{B(x0,r1)} |b - b_{B(x0,r2)}|^q)^{1/q}."""
    _check_cbmo(b, q, lambda_c)
    inner = ball_values(b, BallSpec(center=tuple(x0), radius=r1))
    outer = ball_values(b, BallSpec(center=tuple(x0), radius=r2))
    if outer.size == 0:
        logger.warning(f"⚠️ cbmo: no cell centers inside B({x0}, {r2:g}), term taken as 0")
        return 0.0
    # measuring from one sample keeps constant symbols at exact zeros
    ref = outer[0]
    shifted = outer - ref
    mean = float(np.sum(shifted)) / shifted.size
    deviation = np.abs((inner - ref) - mean)
    norm = lp_of_values(deviation, q, b.grid.cell_volume)
    return sentinel(norm / ball_volume(b.grid.dim, r1) ** (1.0 / q + lambda_c))


def cbmo_norm(
    b: GridFunction,
    q: float,
    lambda_c: float,
    x0: Point,
    radii: RadiiSet,
) -> NormResult:
    _check_cbmo(b, q, lambda_c)
    rows = [
        RadiusTerm(radius=float(r), term=oscillation_gap(b, q, lambda_c, x0, float(r), float(r)), center=tuple(x0))
        for r in radii.values
    ]
    return _assemble("cbmo", rows, [], radii.count)
