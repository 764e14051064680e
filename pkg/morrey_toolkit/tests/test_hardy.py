"""
tests/test_hardy.py
-------------------
Weighted Hardy operator, its sharp constant and the extremal function.
"""

import math

import numpy as np
import pytest

from core.catalog import OscPower, PowerLaw, RadiiSet, Scaled, Tabulated
from core.errors import BadRadiusError, BadRangeError, NoExtremalError
from core.halfline import HalfLineFunction
from services.hardy_service import (
    hardy_apply,
    hardy_catalog,
    hardy_constant,
    hardy_extremal,
    hardy_ratio,
)

T_GRID = RadiiSet(r_min=1e-2, r_max=1e2, count=41)


def power(kappa: float) -> HalfLineFunction:
    return HalfLineFunction(weight=PowerLaw(kappa=kappa))


# v₁ = t^{-1}, w = s^{-3}, v₂ = t: ∫_t^∞ s^{-3}·s ds = 1/t, so B = 1
V1, W, V2 = power(-1.0), power(-3.0), power(1.0)


# ========================================================================
# OPERATOR
# ========================================================================

def test_apply_to_exponential():
    r = np.geomspace(1e-3, 60.0, 500)
    g = HalfLineFunction(
        weight=Tabulated(
            r_values=tuple(r.tolist()),
            phi_values=tuple(np.exp(-r).tolist()),
            kappa_tail=0.0,
            interpolation="loglog",
            zero_tail=True,
        )
    )
    assert math.isclose(hardy_apply(g, power(0.0), 1.0), math.exp(-1.0), rel_tol=0.01)


def test_apply_power():
    assert math.isclose(hardy_apply(power(0.0), W, 1.0), 0.5, rel_tol=0.01)


def test_apply_with_zero_weight():
    zero = HalfLineFunction(weight=Scaled(factor=0.0, weight=PowerLaw(kappa=0.0)))
    assert hardy_apply(power(0.0), zero, 2.0) == 0.0


def test_apply_needs_positive_t():
    with pytest.raises(BadRadiusError):
        hardy_apply(power(0.0), W, 0.0)


def test_ratio_of_constant_g():
    # v₂H g = 1/(2t) peaks at t = 1e-2; sup v₁g = 100
    assert math.isclose(hardy_ratio(power(0.0), V1, V2, W, T_GRID), 0.5, rel_tol=0.01)


# ========================================================================
# SHARP CONSTANT
# ========================================================================

def test_sharp_constant_fixture():
    report = hardy_constant(V1, V2, W, T_GRID)
    assert report.verdict == "finite"
    assert math.isclose(report.B, 1.0, rel_tol=0.02)
    assert len(report.per_t) == 41
    assert report.extremal_ratio >= 0.97
    assert all(ratio <= 1.03 for ratio in report.catalog_ratios.values())
    assert report.sharp and report.sufficient
    assert report.passes


def test_catalog_is_non_decreasing():
    names = [name for name, _ in hardy_catalog()]
    assert names == ["constant", "power_0.25", "power_0.5", "power_1", "saturating", "step_at_1"]
    for _, g in hardy_catalog():
        assert g.monotone == "non_decreasing"


def test_constant_scales_with_v2():
    base = hardy_constant(V1, V2, W, T_GRID)
    doubled = hardy_constant(V1, HalfLineFunction(weight=Scaled(factor=2.0, weight=PowerLaw(kappa=1.0))), W, T_GRID)
    assert doubled.B == 2.0 * base.B


def test_growth_at_infinity_is_infinite():
    report = hardy_constant(V1, power(2.0), W, T_GRID)
    assert report.verdict == "infinite"
    assert report.B == math.inf
    assert report.arg_t is None
    assert report.passes


def test_growth_at_zero_is_infinite():
    assert hardy_constant(V1, power(0.0), W, T_GRID).verdict == "infinite"


def test_divergent_integral_is_infinite():
    # w(s)/v₁ · s = 1 is not integrable against ds/s
    assert hardy_constant(power(0.0), power(0.0), power(-1.0), T_GRID).verdict == "infinite"


def test_t_grid_must_span_four_decades():
    with pytest.raises(BadRangeError):
        hardy_constant(V1, V2, W, RadiiSet(r_min=1.0, r_max=100.0, count=21))


# ========================================================================
# EXTREMAL
# ========================================================================

@pytest.mark.parametrize(
    "v1,expected",
    [
        (PowerLaw(kappa=-1.0), lambda t: t),
        (PowerLaw(kappa=0.0), lambda t: 1.0),
        (OscPower(kappa=0.0), lambda t: 1.0 / 3.0),
    ],
)
def test_extremal_functions(v1, expected):
    g = hardy_extremal(HalfLineFunction(weight=v1))
    assert g.monotone == "non_decreasing"
    for t in (0.5, 2.0, 30.0):
        assert math.isclose(float(g(np.array([t]))[0]), expected(t), rel_tol=1e-9)


def test_extremal_of_growing_v1():
    with pytest.raises(NoExtremalError):
        hardy_extremal(power(1.0))
