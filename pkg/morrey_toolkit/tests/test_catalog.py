"""
tests/test_catalog.py
---------------------
Catalog functions, weights, radii sets and the half-line machinery
(tail envelopes and improper integrals) built on top of them.
"""

import math

import numpy as np
import pytest
from scipy import integrate

from core.catalog import (
    AnnulusIndicator,
    BallIndicator,
    ConstantFunction,
    Gaussian,
    LogAbs,
    OscPower,
    PowerFunction,
    PowerLaw,
    PowerLog,
    RadiiSet,
    Scale,
    Scaled,
    Shifted,
    Sum,
    Tabulated,
    TailLaw,
    central_morrey_weight,
    eval_weight,
    sample,
    support_radius,
)
from core.errors import (
    BadConfigError,
    BadRadiiError,
    BadRadiusError,
    DivergentTailError,
    MarginalDivergenceError,
    NotLocallyIntegrableError,
    SingularSampleError,
)
from core.grid import Grid
from core.halfline import (
    HalfLineFunction,
    TailEnvelope,
    envelope_law,
    improper_integral,
    log_midpoints,
    tail_closure,
    tail_inf,
    tail_sup,
)


# ========================================================================
# FUNCTIONS
# ========================================================================

def test_power_function_checks_integrability():
    grid = Grid(dim=1, half_extent=2.0, cells=8)  # centers ±0.25, ..., ±1.75
    with pytest.raises(NotLocallyIntegrableError):
        sample(PowerFunction(beta=-1.0), grid)
    with pytest.raises(SingularSampleError):
        PowerFunction(beta=-0.5).evaluate(np.array([[0.0]]))
    # cell centers avoid the origin
    assert sample(PowerFunction(beta=-0.5), grid).values.max() == 2.0


def test_log_abs_values():
    assert list(LogAbs().evaluate(np.array([[1.0], [-1.0]]))) == [0.0, 0.0]
    assert math.isclose(LogAbs().evaluate(np.array([[0.6, 0.8]]))[0], 0.0, abs_tol=1e-15)


def test_log_abs_is_singular_at_origin():
    with pytest.raises(SingularSampleError):
        LogAbs().evaluate(np.array([[0.0, 0.0]]))


def test_annulus_must_be_ordered():
    with pytest.raises(BadConfigError):
        AnnulusIndicator(rho1=2.0, rho2=1.0)


def test_composites():
    grid = Grid(dim=1, half_extent=2.0, cells=4)  # centers ±0.5, ±1.5
    spec = Sum(terms=[ConstantFunction(value=1.0), Scale(factor=2.0, spec=BallIndicator(rho=1.0))])
    assert np.array_equal(sample(spec, grid).values, [1.0, 3.0, 3.0, 1.0])
    moved = Shifted(spec=BallIndicator(rho=0.75), shift=(1.0,))
    assert np.array_equal(sample(moved, grid).values, [0.0, 0.0, 1.0, 1.0])


def test_support_radius():
    assert support_radius(BallIndicator(rho=1.5)) == 1.5
    assert support_radius(Gaussian()) is None
    assert support_radius(ConstantFunction(value=0.0)) == 0.0
    assert support_radius(Shifted(spec=BallIndicator(rho=1.0), shift=(3.0, 4.0))) == 6.0


# ========================================================================
# WEIGHTS
# ========================================================================

def test_eval_weight():
    assert eval_weight(PowerLaw(kappa=-0.25), 16.0) == 0.5
    assert eval_weight(Scaled(factor=3.0, weight=PowerLaw(kappa=1.0)), 2.0) == 6.0
    assert eval_weight(PowerLaw(kappa=-0.5), 4.0) == 0.5
    assert eval_weight(PowerLog(kappa=0.0, m=1.0), 1.0) == 1.0
    assert eval_weight(OscPower(kappa=0.0), 1.0) == 2.0
    assert math.isclose(eval_weight(OscPower(kappa=0.0), math.exp(math.pi / 2.0)), 3.0, rel_tol=1e-12)
    with pytest.raises(BadRadiusError):
        eval_weight(PowerLaw(kappa=1.0), 0.0)


def test_central_morrey_weight():
    assert central_morrey_weight(0.5, 2) == PowerLaw(kappa=1.0)


def test_tabulated_step_weight():
    w = Tabulated(r_values=(1.0, 2.0), phi_values=(3.0, 5.0), kappa_tail=0.0)
    assert list(w.evaluate(np.array([0.5, 1.5, 2.5]))) == [3.0, 3.0, 5.0]
    assert w.tail_extreme(1.5, 0.0, "sup") == 5.0
    assert w.tail_extreme(1.5, 0.0, "inf") == 3.0
    dropped = Tabulated(r_values=(1.0, 2.0), phi_values=(3.0, 5.0), kappa_tail=0.0, zero_tail=True)
    assert dropped.evaluate(np.array([3.0]))[0] == 0.0
    assert dropped.tail_law().zero


@pytest.mark.parametrize(
    "r_values,phi_values",
    [((1.0,), (1.0,)), ((2.0, 1.0), (1.0, 1.0)), ((1.0, 2.0), (1.0, 0.0))],
)
def test_tabulated_rejects_bad_tables(r_values, phi_values):
    with pytest.raises(BadConfigError):
        Tabulated(r_values=r_values, phi_values=phi_values, kappa_tail=0.0)


def test_power_log_tail_extreme():
    w = PowerLog(kappa=-1.0, m=1.0)
    # τ^{-1}(1 + ln τ) is non-increasing on [1, ∞)
    assert math.isclose(w.tail_extreme(1.0, 0.0, "sup"), 1.0)
    assert w.tail_extreme(1.0, 0.0, "inf") == 0.0
    assert PowerLog(kappa=0.0, m=1.0).tail_extreme(1.0, 0.0, "sup") == math.inf


def test_tail_law_algebra():
    law = TailLaw(1.0).over(TailLaw(-1.0, 2.0, periodic=True))
    assert law == TailLaw(2.0, -2.0, periodic=True)
    assert TailLaw(-1.0, 3.0).raised(2.0) == TailLaw(-2.0, 6.0)
    assert TailLaw(0.0, 1.0).grows()
    assert TailLaw(0.0, -1.0).decays()
    assert envelope_law(TailLaw(-1.0), "inf").zero
    assert envelope_law(TailLaw(-1.0, periodic=True), "sup") == TailLaw(-1.0, periodic=True)


# ========================================================================
# RADII
# ========================================================================

def test_dyadic_radii_are_exact():
    radii = RadiiSet.dyadic(1.0 / 32.0, 7)
    assert radii.count == 8
    assert list(radii.values) == [2.0 ** j for j in range(-5, 3)]


def test_radii_top_decade():
    radii = RadiiSet.dyadic(1.0, 10)
    assert list(radii.values[radii.in_top_decade()]) == [128.0, 256.0, 512.0, 1024.0]
    assert RadiiSet(r_min=1e-2, r_max=1e2, count=41).values[-1] == 1e2


@pytest.mark.parametrize("r_min,r_max,count", [(1.0, 1.0, 3), (0.0, 1.0, 3), (1.0, 2.0, 1)])
def test_bad_radii(r_min, r_max, count):
    with pytest.raises(BadRadiiError):
        RadiiSet(r_min=r_min, r_max=r_max, count=count)


# ========================================================================
# HALF-LINE ENVELOPES AND INTEGRALS
# ========================================================================

def test_tail_sup_values():
    assert tail_sup(HalfLineFunction(weight=PowerLaw(kappa=-1.0)), 2.0) == 0.5
    assert tail_sup(HalfLineFunction(weight=PowerLaw(kappa=1.0)), 2.0) == math.inf
    assert tail_sup(HalfLineFunction(weight=OscPower(kappa=0.0)), 5.0) == 3.0


def test_tail_inf_values():
    assert tail_inf(HalfLineFunction(weight=PowerLaw(kappa=-1.0)), 2.0) == 0.0
    assert math.isclose(tail_inf(HalfLineFunction(weight=PowerLaw(kappa=-1.0)), 2.0, extra_power=1.0), 1.0)
    assert tail_inf(HalfLineFunction(weight=OscPower(kappa=0.0)), 5.0) == 1.0


def test_envelope_is_monotone():
    env = TailEnvelope(OscPower(kappa=-0.5), mode="sup")
    vals = env(env.grid[::7])
    assert np.all(np.diff(vals) <= 0.0)
    assert np.all(vals >= OscPower(kappa=-0.5).evaluate(env.grid[::7]))


def test_monotone_flag_is_checked():
    HalfLineFunction(weight=PowerLaw(kappa=1.0), monotone="non_decreasing")
    with pytest.raises(BadConfigError):
        HalfLineFunction(weight=PowerLaw(kappa=1.0), monotone="non_increasing")


def test_log_midpoints_minimum_cells():
    nodes, step = log_midpoints(1.0, 1.1)
    assert nodes.size == 16
    assert math.isclose(step * 16, math.log(1.1))


def _power(k):
    return lambda t: np.asarray(t, dtype=float) ** k


def test_improper_integral_of_power():
    # ∫_1^∞ τ^{-1} dτ/τ = 1
    assert math.isclose(improper_integral(_power(-1.0), 1.0, TailLaw(-1.0)), 1.0, rel_tol=1e-4)


def test_improper_integral_slow_decay():
    # ∫_1^∞ τ^{-1/20} dτ/τ = 20; most of the mass lies past the sample grid
    assert math.isclose(improper_integral(_power(-0.05), 1.0, TailLaw(-0.05)), 20.0, rel_tol=1e-4)


def test_improper_integral_periodic_tail():
    w = OscPower(kappa=-1.0)
    value = improper_integral(w.evaluate, 1.0, w.tail_law())
    # ∫_0^∞ e^{-u}(2 + sin u) du
    assert math.isclose(value, 2.5, rel_tol=1e-4)


def test_improper_integral_with_log_weight():
    # ∫_1^∞ (1 + ln τ) τ^{-1} dτ/τ = 2
    value = improper_integral(_power(-1.0), 1.0, TailLaw(-1.0), log_weight_from=1.0)
    assert math.isclose(value, 2.0, rel_tol=1e-4)


def test_power_log_tail_in_closed_form():
    # ∫_s^∞ τ^{-κ}(1 + ln τ)² dτ/τ = s^{-κ} κ^{-3} (x² + 2x + 2), x = κ(1 + ln s)
    w = PowerLog(kappa=-0.05, m=2.0)
    s, kappa = 1e8, 0.05
    x = kappa * (1.0 + math.log(s))
    expected = s ** -kappa * kappa ** -3 * (x * x + 2.0 * x + 2.0)
    assert math.isclose(tail_closure(w.evaluate, s, w.tail_law()), expected, rel_tol=1e-9)


@pytest.mark.parametrize("m", [-2.5, -1.0, 0.5, 2.0])
@pytest.mark.parametrize("offset", [None, 1.5])
def test_power_log_tail_matches_quadrature(m, offset):
    w = PowerLog(kappa=-0.5, m=m)
    s = 1e3
    u0 = 1.0 + math.log(s)
    head = eval_weight(w, s)

    # u = 1 + ln τ
    def integrand(u):
        factor = 1.0 if offset is None else offset + u - u0
        return factor * head * math.exp(-0.5 * (u - u0)) * (u / u0) ** m

    expected, _ = integrate.quad(integrand, u0, math.inf, epsabs=0.0, epsrel=1e-10)
    value = tail_closure(w.evaluate, s, w.tail_law(), offset)
    assert math.isclose(value, expected, rel_tol=1e-8)


def test_improper_integral_divergence():
    with pytest.raises(MarginalDivergenceError):
        improper_integral(_power(0.0), 1.0, TailLaw(0.0))
    with pytest.raises(DivergentTailError):
        improper_integral(_power(0.5), 1.0, TailLaw(0.5))


def test_zero_tail_needs_no_closure():
    w = Tabulated(r_values=(1.0, 2.0), phi_values=(1.0, 1.0), kappa_tail=0.0, zero_tail=True)
    value = improper_integral(w.evaluate, 1.0, w.tail_law())
    # the jump at τ = 2 costs at most one cell of the log grid
    assert math.isclose(value, math.log(2.0), rel_tol=1e-2)
