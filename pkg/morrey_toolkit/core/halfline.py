# morrey_toolkit/core/halfline.py
"""
Functions on (0, ∞): tail envelopes (ess sup / ess inf over (s, ∞)) and
improper integrals over (a, ∞).

Both work the same way: a log-spaced sample grid up to HALF_LINE_MAX, then a
closed form past it driven by the weight's tail law: an incomplete gamma
integral for power and power-log tails, and a period-by-period sum in ln τ for
tails with a 2π-periodic factor.
"""

import logging
import math
from typing import Callable, Literal, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, model_validator
from scipy import special

from core.catalog import TWO_PI, TailLaw, WeightSpec
from core.config import settings
from core.errors import BadConfigError, DivergentTailError, MarginalDivergenceError

logger = logging.getLogger(__name__)

Monotone = Literal["none", "non_decreasing", "non_increasing"]
Integrand = Callable[[np.ndarray], np.ndarray]

PERIOD_POINTS = 512


def sample_grid(t_min: Optional[float] = None, t_max: Optional[float] = None) -> np.ndarray:
    t_min = t_min or settings.HALF_LINE_MIN
    t_max = t_max or settings.HALF_LINE_MAX
    count = int(math.ceil(math.log10(t_max / t_min) * settings.POINTS_PER_DECADE)) + 1
    return np.geomspace(t_min, t_max, count)


class HalfLineFunction(BaseModel):
    """A nonnegative function on (0, ∞) backed by a catalog weight."""

    model_config = ConfigDict(frozen=True)

    weight: WeightSpec
    monotone: Monotone = "none"

    @model_validator(mode="after")
    def _check_monotone(self) -> "HalfLineFunction":
        if self.monotone == "none":
            return self
        vals = self.weight.evaluate(sample_grid())
        steps = np.diff(vals)
        slack = 1e-12 * np.maximum(np.abs(vals[1:]), np.abs(vals[:-1]))
        ok = np.all(steps >= -slack) if self.monotone == "non_decreasing" else np.all(steps <= slack)
        if not ok:
            raise BadConfigError(f"function is not {self.monotone} on the sample grid")
        return self

    def __call__(self, t: np.ndarray) -> np.ndarray:
        return self.weight.evaluate(np.asarray(t, dtype=float))

    def tail_law(self) -> TailLaw:
        return self.weight.tail_law()

    def head_exponent(self) -> float:
        return self.weight.head_exponent()


# ========================================================================
# TAIL ENVELOPES
# ========================================================================

class TailEnvelope:
    """s ↦ ext_{τ ≥ s} φ(τ)τ^extra_power, ext = max or min.

    Precomputes suffix extremes on the sample grid; points past the grid use
    the weight's closed-form tail extreme.
    """

    def __init__(
        self,
        weight: WeightSpec,
        extra_power: float = 0.0,
        mode: Literal["sup", "inf"] = "sup",
        grid: Optional[np.ndarray] = None,
    ):
        self.weight = weight
        self.extra_power = extra_power
        self.mode = mode
        self.grid = sample_grid() if grid is None else np.asarray(grid, dtype=float)
        self._pick = np.maximum if mode == "sup" else np.minimum

        vals = self._powered(self.grid)
        self.beyond = weight.tail_extreme(float(self.grid[-1]), extra_power, mode)
        suffix = self._pick.accumulate(vals[::-1])[::-1]
        self.suffix = self._pick(np.append(suffix, self.beyond), self.beyond)

    def _powered(self, t: np.ndarray) -> np.ndarray:
        return self.weight.evaluate(t) * t ** self.extra_power

    def __call__(self, s) -> np.ndarray:
        s = np.atleast_1d(np.asarray(s, dtype=float))
        idx = np.searchsorted(self.grid, s, side="right")
        with np.errstate(invalid="ignore"):
            out = self._pick(self._powered(s), self.suffix[idx])
        past = s > self.grid[-1]
        for i in np.flatnonzero(past):
            out[i] = self.weight.tail_extreme(float(s[i]), self.extra_power, self.mode)
        return out


def tail_sup(v: HalfLineFunction, s: float) -> float:
    """ess sup of v over (s, ∞); +∞ when the tail grows."""
    return float(TailEnvelope(v.weight, 0.0, "sup")(s)[0])


def tail_inf(v: HalfLineFunction, s: float, extra_power: float = 0.0) -> float:
    """ess inf of v(τ)τ^extra_power over (s, ∞)."""
    return float(TailEnvelope(v.weight, extra_power, "inf")(s)[0])


def envelope_law(law: TailLaw, mode: str) -> TailLaw:
    """Tail law of the sup/inf envelope of a function with tail law ``law``."""
    if law.zero:
        return law
    if mode == "inf" and law.decays():
        return TailLaw(0.0, zero=True)
    if law.exponent == 0 and law.log_power == 0:
        return TailLaw(0.0)
    # s^κ times a function of ln s with the same period
    return TailLaw(law.exponent, law.log_power, law.periodic)


# ========================================================================
# IMPROPER INTEGRALS
# ========================================================================

def log_midpoints(a: float, b: float, per_decade: Optional[int] = None) -> Tuple[np.ndarray, float]:
    """Midpoint nodes of a uniform partition of [ln a, ln b] and the step."""
    per_decade = per_decade or settings.POINTS_PER_DECADE
    cells = max(16, int(math.ceil(math.log10(b / a) * per_decade)))
    step = math.log(b / a) / cells
    nodes = a * np.exp((np.arange(cells) + 0.5) * step)
    return nodes, step


def _scaled_upper_gamma(a: float, x: float) -> float:
    """e^x Γ(a, x) for real a and x > 0; nonpositive a by downward recurrence."""
    if x > 600.0:
        return x ** (a - 1.0) * (1.0 + (a - 1.0) / x + (a - 1.0) * (a - 2.0) / (x * x))
    if a > 0:
        return math.exp(x) * float(special.gammaincc(a, x)) * float(special.gamma(a))
    if a == math.floor(a):
        top, value = 0.0, math.exp(x) * float(special.exp1(x))
    else:
        top = a + math.floor(-a) + 1.0
        value = math.exp(x) * float(special.gammaincc(top, x)) * float(special.gamma(top))
    # e^x Γ(b, x) = (e^x Γ(b+1, x) - x^b) / b
    b = top - 1.0
    while b >= a - 1e-12:
        value = (value - x ** b) / b
        b -= 1.0
    return value


def _power_log_tail(head: float, start: float, k: float, m: float, log_offset: Optional[float]) -> float:
    """Exact tail for F(τ) = F(s)(τ/s)^k ((1+ln τ)/(1+ln s))^m, k < 0.

    With u = 1 + ln τ the tail is ∫_{u0}^∞ e^{k(u-u0)} (u/u0)^m du, an upper
    incomplete gamma integral.
    """
    kappa = -k
    if m == 0:
        return head / kappa if log_offset is None else head * (log_offset / kappa + 1.0 / kappa ** 2)
    u0 = 1.0 + math.log(start)
    if u0 <= 0:
        raise BadConfigError(f"power-log tails close only past τ = 1/e, got start {start:g}")
    x = kappa * u0
    scale = head * u0 ** -m
    plain = scale * kappa ** (-m - 1.0) * _scaled_upper_gamma(m + 1.0, x)
    if log_offset is None:
        return plain
    # ln(τ/s) = u - u0
    return (log_offset - u0) * plain + scale * kappa ** (-m - 2.0) * _scaled_upper_gamma(m + 2.0, x)


def tail_closure(
    fn: Integrand,
    start: float,
    law: TailLaw,
    log_offset: Optional[float] = None,
) -> float:
    """∫_start^∞ F(τ) dτ/τ, or ∫_start^∞ (c + ln(τ/start)) F(τ) dτ/τ when
    ``log_offset`` = c is given, for F with tail law ``law``."""
    if law.zero:
        return 0.0
    with_log = log_offset is not None
    k, m = law.exponent, law.log_power

    if k > 0:
        raise DivergentTailError(f"integrand grows like τ^{k:g} at infinity")
    if k == 0:
        ell = 1.0 + math.log(start)
        head = float(fn(np.array([start]))[0])
        if with_log:
            if m < -2 and not law.periodic:
                return head * (log_offset * ell / (-m - 1.0) + ell * ell / ((-m - 1.0) * (-m - 2.0)))
            raise DivergentTailError("log-weighted tail with exponent 0 diverges")
        if m < -1 and not law.periodic:
            return head * ell / (-m - 1.0)
        if m in (0.0, -1.0):
            raise MarginalDivergenceError("integrand decays exactly like dτ/τ")
        raise DivergentTailError(f"integrand tail (log power {m:g}) is not integrable")

    if not law.periodic:
        return _power_log_tail(float(fn(np.array([start]))[0]), start, k, m, log_offset)

    # a log power on top of the periodic factor is folded into the exponent at the start point
    k_eff = k + (m / (1.0 + math.log(start)) if m and start > 1.0 else 0.0)
    if k_eff >= 0:
        raise DivergentTailError(f"log factor overwhelms τ^{k:g} on the sampled range")
    v = (np.arange(PERIOD_POINTS) + 0.5) * (TWO_PI / PERIOD_POINTS)
    vals = fn(start * np.exp(v))
    dv = TWO_PI / PERIOD_POINTS
    p0 = float(np.sum(vals)) * dv
    q = math.exp(TWO_PI * k_eff)
    if not with_log:
        return p0 / (1.0 - q)
    p1 = float(np.sum(v * vals)) * dv
    return (log_offset * p0 + p1) / (1.0 - q) + TWO_PI * p0 * q / (1.0 - q) ** 2


def improper_integral(
    fn: Integrand,
    a: float,
    law: TailLaw,
    log_weight_from: Optional[float] = None,
    split: Optional[float] = None,
) -> float:
    """∫_a^∞ F(τ) dτ/τ, optionally with the factor (1 + ln(τ/r)), r = ``log_weight_from``.

    Midpoint rule in ln τ on [a, split] plus the closed-form tail past ``split``.
    """
    split = split or settings.HALF_LINE_MAX
    body = 0.0
    if a < split:
        nodes, step = log_midpoints(a, split)
        vals = fn(nodes)
        if log_weight_from is not None:
            vals = vals * (1.0 + np.log(nodes / log_weight_from))
        body = float(np.sum(vals)) * step
    start = max(a, split)
    offset = None if log_weight_from is None else 1.0 + math.log(start / log_weight_from)
    return body + tail_closure(fn, start, law, offset)
