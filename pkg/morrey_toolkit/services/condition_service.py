# morrey_toolkit/services/condition_service.py
"""
Checkers for the weight conditions that the boundedness results assume:
doubling, the Nakai integral condition, the Spanne and Guliyev conditions and
the log-weighted commutator condition.

Each checker tabulates LHS(r) over a RadiiSet, divides by the right-hand
weight, and turns the ratio sequence into a verdict.
"""

import logging
import math
from typing import Callable, List, Literal, Optional

import numpy as np
from pydantic import BaseModel

from core.catalog import RadiiSet, TailLaw, WeightSpec
from core.config import settings
from core.errors import BadConfigError, BadLambdaError, DivergentTailError, MarginalDivergenceError
from core.grid import Point
from core.halfline import TailEnvelope, envelope_law, improper_integral
from services.norm_service import sentinel
from services.operator_service import OperatorParams

logger = logging.getLogger(__name__)

Verdict = Literal["holds", "fails-divergent", "fails-growing", "marginal"]
ConditionId = Literal["doubling", "nakai", "spanne", "guliyev", "commutator"]

DOUBLING_FACTORS = (1.0, 1.25, 1.5, 2.0)


class ConditionRow(BaseModel):
    r: float
    lhs: float
    ratio: float


class ConditionReport(BaseModel):
    condition_id: ConditionId
    per_r: List[ConditionRow]
    empirical_C: float
    argmax_r: Optional[float] = None
    trend_slope: Optional[float] = None
    verdict: Verdict
    tail_note: str = ""
    x0: Optional[Point] = None

    @property
    def holds(self) -> bool:
        return self.verdict == "holds"


def top_decade_slope(radii: np.ndarray, values: np.ndarray) -> Optional[float]:
    """Least-squares slope of log(values) against log(r) over the top decade of r.

    None when fewer than two positive finite values are available.
    """
    radii = np.asarray(radii, dtype=float)
    values = np.asarray(values, dtype=float)
    top = radii >= radii[-1] / 10.0
    usable = top & np.isfinite(values) & (values > 0)
    if np.count_nonzero(usable) < 2:
        return None
    slope, _ = np.polyfit(np.log(radii[usable]), np.log(values[usable]), 1)
    return float(slope)


def _report(
    condition_id: ConditionId,
    radii: np.ndarray,
    lhs: np.ndarray,
    rhs: np.ndarray,
    note: str = "",
    x0: Optional[Point] = None,
) -> ConditionReport:
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = np.where(rhs > 0, lhs / rhs, np.where(lhs > 0, math.inf, 0.0))
    rows = [
        ConditionRow(r=float(r), lhs=sentinel(float(a)), ratio=sentinel(float(c)))
        for r, a, c in zip(radii, lhs, ratios)
    ]
    best = int(np.argmax([row.ratio for row in rows]))
    empirical = rows[best].ratio
    slope = top_decade_slope(radii, np.array([row.ratio for row in rows]))

    if math.isinf(empirical):
        verdict: Verdict = "fails-divergent"
    elif slope is not None and slope > settings.TREND_SLOPE:
        verdict = "fails-growing"
    else:
        verdict = "holds"
    logger.info(f"🧭 {condition_id}: C = {empirical:.6g}, verdict {verdict}")
    return ConditionReport(
        condition_id=condition_id,
        per_r=rows,
        empirical_C=empirical,
        argmax_r=rows[best].r,
        trend_slope=slope,
        verdict=verdict,
        tail_note=note,
        x0=x0,
    )


def _failed(
    condition_id: ConditionId,
    radii: np.ndarray,
    error: DivergentTailError,
    x0: Optional[Point] = None,
) -> ConditionReport:
    verdict: Verdict = "marginal" if isinstance(error, MarginalDivergenceError) else "fails-divergent"
    logger.info(f"🧭 {condition_id}: {verdict} ({error.message})")
    return ConditionReport(
        condition_id=condition_id,
        per_r=[ConditionRow(r=float(r), lhs=math.inf, ratio=math.inf) for r in radii],
        empirical_C=math.inf,
        verdict=verdict,
        tail_note=error.message,
        x0=x0,
    )


def _tail_integrals(
    integrand: Callable[[np.ndarray], np.ndarray],
    law: TailLaw,
    radii: np.ndarray,
    log_weight: bool = False,
) -> np.ndarray:
    """∫_r^∞ F dt/t (times 1 + ln(t/r) when ``log_weight``) for each r."""
    return np.array([
        improper_integral(integrand, float(r), law, log_weight_from=float(r) if log_weight else None)
        for r in radii
    ])


def _note(law: TailLaw) -> str:
    return f"integrand tail ~ t^{law.exponent:g} (log power {law.log_power:g})"


# ========================================================================
# CONDITIONS
# ========================================================================

def check_doubling(phi: WeightSpec, radii: RadiiSet) -> ConditionReport:
    """max over r and t ∈ {r, 1.25r, 1.5r, 2r} of max(φ(t)/φ(r), φ(r)/φ(t))."""
    rs = radii.values
    base = phi.evaluate(rs)
    worst = np.ones_like(rs)
    with np.errstate(divide="ignore", invalid="ignore"):
        for factor in DOUBLING_FACTORS[1:]:
            moved = phi.evaluate(rs * factor)
            pair = np.maximum(moved / base, base / moved)
            worst = np.maximum(worst, np.nan_to_num(pair, nan=math.inf))
    rows = [ConditionRow(r=float(r), lhs=sentinel(float(c)), ratio=sentinel(float(c))) for r, c in zip(rs, worst)]
    best = int(np.argmax(worst))
    empirical = rows[best].ratio

    if math.isinf(empirical):
        verdict: Verdict = "fails-divergent"
    elif empirical > settings.DOUBLING_CAP:
        verdict = "fails-growing"
    else:
        verdict = "holds"
    logger.info(f"🧭 doubling: C = {empirical:.6g}, verdict {verdict}")
    return ConditionReport(
        condition_id="doubling",
        per_r=rows,
        empirical_C=empirical,
        argmax_r=rows[best].r,
        verdict=verdict,
        tail_note=f"doubling cap {settings.DOUBLING_CAP:g}",
    )


def check_nakai_integral(phi: WeightSpec, params: OperatorParams, radii: RadiiSet) -> ConditionReport:
    """∫_r^∞ t^{αp}φ(t)^p dt/t against r^{αp}φ(r)^p."""
    a, p = params.alpha, _require_p(params)
    rs = radii.values
    law = phi.tail_law().raised(p).shifted(a * p)
    try:
        lhs = _tail_integrals(lambda t: t ** (a * p) * phi.evaluate(t) ** p, law, rs)
    except DivergentTailError as e:
        return _failed("nakai", rs, e)
    rhs = rs ** (a * p) * phi.evaluate(rs) ** p
    return _report("nakai", rs, lhs, rhs, _note(law))


def check_spanne(
    phi1: WeightSpec,
    phi2: WeightSpec,
    params: OperatorParams,
    radii: RadiiSet,
) -> ConditionReport:
    """∫_r^∞ t^{α-1}φ₁(t) dt against φ₂(r)."""
    a = params.alpha
    rs = radii.values
    law = phi1.tail_law().shifted(a)
    try:
        lhs = _tail_integrals(lambda t: t ** a * phi1.evaluate(t), law, rs)
    except DivergentTailError as e:
        return _failed("spanne", rs, e)
    return _report("spanne", rs, lhs, phi2.evaluate(rs), _note(law))


def _inf_envelope(phi1: WeightSpec, params: OperatorParams):
    """t ↦ ess inf_{τ>t} φ₁(τ)τ^{n/p} and its tail law."""
    n, p = params.dim, _require_p(params)
    envelope = TailEnvelope(phi1, n / p, "inf")
    law = envelope_law(phi1.tail_law().shifted(n / p), "inf")
    return envelope, law


def guliyev_lhs(phi1: WeightSpec, params: OperatorParams, radii: RadiiSet) -> np.ndarray:
    """∫_r^∞ [ess inf_{τ>t} φ₁(τ)τ^{n/p}] t^{-n/q-1} dt for each r (raises on divergence)."""
    n, q = params.dim, params.target_q
    envelope, law = _inf_envelope(phi1, params)
    return _tail_integrals(lambda t: envelope(t) * t ** (-n / q), law.shifted(-n / q), radii.values)


def check_guliyev(
    phi1: WeightSpec,
    phi2: WeightSpec,
    params: OperatorParams,
    x0: Point,
    radii: RadiiSet,
) -> ConditionReport:
    rs = radii.values
    _, law = _inf_envelope(phi1, params)
    law = law.shifted(-params.dim / params.target_q)
    try:
        lhs = guliyev_lhs(phi1, params, radii)
    except DivergentTailError as e:
        return _failed("guliyev", rs, e, tuple(x0))
    return _report("guliyev", rs, lhs, phi2.evaluate(rs), _note(law), tuple(x0))


def check_commutator_condition(
    phi1: WeightSpec,
    phi2: WeightSpec,
    params: OperatorParams,
    x0: Point,
    radii: RadiiSet,
) -> ConditionReport:
    """∫_r^∞ (1 + ln(t/r)) [ess inf_{τ>t} φ₁(τ)τ^{n/p}] t^{-(n/q - nλ)-1} dt against φ₂(r)."""
    n, q, lam = params.dim, params.target_q, params.lambda_c
    if not 0 <= lam < 1.0 / n:
        raise BadLambdaError(f"lambda must lie in [0, 1/{n}), got {lam}")
    rs = radii.values
    beta = n / q - n * lam
    if beta <= 0:
        note = f"n/q - nλ = {beta:g} <= 0"
        logger.info(f"🧭 commutator: fails-divergent ({note})")
        return _failed("commutator", rs, DivergentTailError(note), tuple(x0))

    envelope, law = _inf_envelope(phi1, params)
    law = law.shifted(-beta)
    try:
        lhs = _tail_integrals(lambda t: envelope(t) * t ** (-beta), law, rs, log_weight=True)
    except DivergentTailError as e:
        return _failed("commutator", rs, e, tuple(x0))
    return _report("commutator", rs, lhs, phi2.evaluate(rs), _note(law), tuple(x0))


def _require_p(params: OperatorParams) -> float:
    if params.p is None:
        raise BadConfigError("this condition needs the exponent p")
    return params.p


def check_condition(
    condition_id: ConditionId,
    phi1: WeightSpec,
    phi2: Optional[WeightSpec] = None,
    params: Optional[OperatorParams] = None,
    x0: Optional[Point] = None,
    radii: Optional[RadiiSet] = None,
) -> ConditionReport:
    """Dispatch to the checker named by ``condition_id``."""
    if radii is None:
        raise BadConfigError("conditions need a radii set")
    if condition_id == "doubling":
        return check_doubling(phi1, radii)
    if params is None:
        raise BadConfigError(f"condition '{condition_id}' needs params")
    if condition_id == "nakai":
        return check_nakai_integral(phi1, params, radii)
    if phi2 is None:
        raise BadConfigError(f"condition '{condition_id}' needs weight2")
    if condition_id == "spanne":
        return check_spanne(phi1, phi2, params, radii)
    x0 = tuple(x0) if x0 is not None else (0.0,) * params.dim
    if condition_id == "guliyev":
        return check_guliyev(phi1, phi2, params, x0, radii)
    if condition_id == "commutator":
        return check_commutator_condition(phi1, phi2, params, x0, radii)
    raise BadConfigError(f"unknown condition '{condition_id}'")
