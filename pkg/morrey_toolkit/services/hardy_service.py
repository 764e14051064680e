# morrey_toolkit/services/hardy_service.py
"""
The weighted Hardy operator H*_w g(t) = ∫_t^∞ g(s)w(s) ds on non-decreasing g,
its minimal constant

    B = sup_t v₂(t) ∫_t^∞ w(s) / (sup_{τ>s} v₁(τ)) ds,

and the extremal g = 1/sup_{τ>t} v₁(τ) that attains it.
"""

import logging
import math
from typing import Dict, List, Literal, Optional, Tuple

import numpy as np
from pydantic import BaseModel

from core.catalog import PowerLaw, RadiiSet, Tabulated, TailLaw
from core.config import settings
from core.errors import (
    BadRadiusError,
    BadRangeError,
    DivergentTailError,
    MarginalDivergenceError,
    NoExtremalError,
)
from core.halfline import (
    HalfLineFunction,
    TailEnvelope,
    envelope_law,
    improper_integral,
    sample_grid,
    tail_sup,
)
from services.norm_service import sentinel

logger = logging.getLogger(__name__)

__all__ = [
    "HardyReport",
    "HardyRow",
    "hardy_apply",
    "hardy_catalog",
    "hardy_constant",
    "hardy_extremal",
    "hardy_ratio",
    "tail_sup",
]

MIN_DECADES = 4.0


class HardyRow(BaseModel):
    t: float
    value: float


class HardyReport(BaseModel):
    B: float
    per_t: List[HardyRow]
    arg_t: Optional[float] = None
    verdict: Literal["finite", "infinite"]
    empirical_Cstar: Optional[float] = None
    extremal_ratio: Optional[float] = None
    catalog_ratios: Dict[str, float] = {}
    skipped: Dict[str, str] = {}
    sharp: Optional[bool] = None
    sufficient: Optional[bool] = None

    @property
    def passes(self) -> bool:
        """False only when a finite B is beaten or not attained within tolerance."""
        return self.sharp is not False and self.sufficient is not False


# ========================================================================
# OPERATOR
# ========================================================================

def hardy_apply(g: HalfLineFunction, w: HalfLineFunction, t: float) -> float:
    """H*_w g(t); raises divergent-tail when g·w is not integrable at ∞."""
    if not t > 0:
        raise BadRadiusError(f"t must be positive, got {t}")
    law = g.tail_law().times(w.tail_law()).shifted(1.0)
    return improper_integral(lambda s: g(s) * w(s) * s, t, law)


def hardy_ratio(
    g: HalfLineFunction,
    v1: HalfLineFunction,
    v2: HalfLineFunction,
    w: HalfLineFunction,
    t_grid: RadiiSet,
) -> float:
    """sup_t v₂(t)·H*_w g(t) / sup_t v₁(t)g(t), both sups over ``t_grid``."""
    ts = t_grid.values
    applied = np.array([hardy_apply(g, w, float(t)) for t in ts])
    numerator = float(np.max(v2(ts) * applied))
    denominator = float(np.max(v1(ts) * g(ts)))
    if denominator == 0.0:
        return 0.0 if numerator == 0.0 else math.inf
    return sentinel(numerator / denominator)


# ========================================================================
# SHARP CONSTANT
# ========================================================================

def _blows_up_at_infinity(integral_law: TailLaw, v2_law: TailLaw) -> bool:
    """v₂(t)·∫_t^∞ grows without bound as t → ∞ (integral ~ t^{exponent})."""
    if integral_law.zero or v2_law.zero:
        return False
    gamma = v2_law.exponent + integral_law.exponent
    return gamma > 0 or (gamma == 0 and v2_law.log_power + integral_law.log_power > 0)


def _blows_up_at_zero(integrand_head: float, v2_head: float) -> bool:
    """v₂(t)·∫_t^∞ grows without bound as t → 0 (integrand ~ s^{head} in ds/s)."""
    if integrand_head < 0:
        return v2_head + integrand_head < 0
    if integrand_head == 0:
        # logarithmic growth of the integral
        return v2_head <= 0
    return v2_head < 0


def hardy_constant(
    v1: HalfLineFunction,
    v2: HalfLineFunction,
    w: HalfLineFunction,
    t_grid: RadiiSet,
    catalog: Optional[List[Tuple[str, HalfLineFunction]]] = None,
) -> HardyReport:
    """B over ``t_grid`` together with the extremal and catalog ratio checks."""
    if math.log10(t_grid.r_max / t_grid.r_min) < MIN_DECADES - 1e-9:
        raise BadRangeError(f"t grid must span at least {MIN_DECADES:g} decades")

    envelope = TailEnvelope(v1.weight, 0.0, "sup")
    v1_law = v1.tail_law()
    if v1_law.grows():
        integrand_law = TailLaw(0.0, zero=True)
    else:
        integrand_law = w.tail_law().over(envelope_law(v1_law, "sup")).shifted(1.0)
    integrand_head = w.head_exponent() - min(v1.head_exponent(), 0.0) + 1.0

    def integrand(s: np.ndarray) -> np.ndarray:
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.nan_to_num(w(s) / envelope(s), nan=0.0, posinf=math.inf) * s

    ts = t_grid.values
    infinite = False
    try:
        integrals = np.array([improper_integral(integrand, float(t), integrand_law) for t in ts])
    except MarginalDivergenceError as e:
        logger.info(f"🧭 Hardy integral diverges logarithmically: {e.message}")
        infinite, integrals = True, np.full(ts.size, math.inf)
    except DivergentTailError as e:
        logger.info(f"🧭 Hardy integral diverges: {e.message}")
        infinite, integrals = True, np.full(ts.size, math.inf)

    if not infinite and integrand_law.exponent < 0:
        if _blows_up_at_infinity(integrand_law, v2.tail_law()):
            logger.info("🧭 v₂(t)·∫_t^∞ grows as t → ∞")
            infinite = True
    if not infinite and not integrand_law.zero and _blows_up_at_zero(integrand_head, v2.head_exponent()):
        logger.info("🧭 v₂(t)·∫_t^∞ grows as t → 0")
        infinite = True

    with np.errstate(invalid="ignore"):
        values = v2(ts) * integrals
    rows = [HardyRow(t=float(t), value=sentinel(float(v))) for t, v in zip(ts, values)]
    best = int(np.argmax([row.value for row in rows]))
    B = math.inf if infinite else rows[best].value
    report = HardyReport(
        B=B,
        per_t=rows,
        arg_t=None if math.isinf(B) else rows[best].t,
        verdict="infinite" if math.isinf(B) else "finite",
    )
    logger.info(f"✅ Hardy constant B = {B:.6g} over {t_grid.count} values of t")
    if math.isinf(B):
        return report
    return _ratio_checks(report, v1, v2, w, t_grid, catalog)


def _ratio_checks(
    report: HardyReport,
    v1: HalfLineFunction,
    v2: HalfLineFunction,
    w: HalfLineFunction,
    t_grid: RadiiSet,
    catalog: Optional[List[Tuple[str, HalfLineFunction]]],
) -> HardyReport:
    tol = settings.POINTWISE_TOLERANCE
    ratios: Dict[str, float] = {}
    skipped: Dict[str, str] = {}
    for name, g in catalog if catalog is not None else hardy_catalog():
        try:
            ratios[name] = hardy_ratio(g, v1, v2, w, t_grid)
        except DivergentTailError as e:
            logger.warning(f"⚠️ Skipping catalog g '{name}': {e}")
            skipped[name] = str(e)

    extremal_ratio = None
    try:
        extremal_ratio = hardy_ratio(hardy_extremal(v1), v1, v2, w, t_grid)
    except (NoExtremalError, DivergentTailError) as e:
        logger.warning(f"⚠️ Extremal ratio unavailable: {e}")
        skipped["extremal"] = str(e)

    tested = list(ratios.values()) + ([extremal_ratio] if extremal_ratio is not None else [])
    best = max(tested) if tested else None
    update = {
        "catalog_ratios": ratios,
        "skipped": skipped,
        "extremal_ratio": extremal_ratio,
        "empirical_Cstar": best,
        "sufficient": None if best is None else best <= report.B * (1.0 + tol),
        "sharp": None if extremal_ratio is None else extremal_ratio >= report.B * (1.0 - tol),
    }
    if update["sufficient"] is False:
        logger.warning(f"⚠️ A tested g beats B: ratio {best:.6g} > {report.B:.6g}")
    if update["sharp"] is False:
        logger.warning(f"⚠️ Extremal ratio {extremal_ratio:.6g} falls short of B = {report.B:.6g}")
    return report.model_copy(update=update)


# ========================================================================
# EXTREMAL & CATALOG
# ========================================================================

def hardy_extremal(v1: HalfLineFunction) -> HalfLineFunction:
    """g(t) = 1 / sup_{τ>t} v₁(τ), tabulated on the sample grid."""
    envelope = TailEnvelope(v1.weight, 0.0, "sup")
    sups = envelope(envelope.grid)
    if not np.all(np.isfinite(sups)):
        raise NoExtremalError("sup of v1 over a tail is infinite")
    tail = envelope_law(v1.tail_law(), "sup")
    table = Tabulated(
        r_values=tuple(envelope.grid.tolist()),
        phi_values=tuple((1.0 / sups).tolist()),
        kappa_tail=0.0 if tail.zero else -min(tail.exponent, 0.0),
        kappa_head=-min(v1.head_exponent(), 0.0),
        interpolation="loglog",
    )
    return HalfLineFunction(weight=table, monotone="non_decreasing")


def _saturating() -> Tabulated:
    grid = sample_grid()
    return Tabulated(
        r_values=tuple(grid.tolist()),
        phi_values=tuple((grid / (1.0 + grid)).tolist()),
        kappa_tail=0.0,
        kappa_head=1.0,
        interpolation="loglog",
    )


def hardy_catalog() -> List[Tuple[str, HalfLineFunction]]:
    """Named non-decreasing test functions for the sufficiency check."""
    return [
        ("constant", HalfLineFunction(weight=PowerLaw(kappa=0.0), monotone="non_decreasing")),
        ("power_0.25", HalfLineFunction(weight=PowerLaw(kappa=0.25), monotone="non_decreasing")),
        ("power_0.5", HalfLineFunction(weight=PowerLaw(kappa=0.5), monotone="non_decreasing")),
        ("power_1", HalfLineFunction(weight=PowerLaw(kappa=1.0), monotone="non_decreasing")),
        ("saturating", HalfLineFunction(weight=_saturating(), monotone="non_decreasing")),
        (
            "step_at_1",
            HalfLineFunction(
                weight=Tabulated(
                    r_values=(settings.HALF_LINE_MIN, 1.0),
                    phi_values=(0.5, 1.0),
                    kappa_tail=0.0,
                ),
                monotone="non_decreasing",
            ),
        ),
    ]
