"""
tests/test_norms.py
-------------------
Morrey, Beurling and central Campanato norms against closed forms.
"""

import math

import numpy as np
import pytest

from core.catalog import BallIndicator, ConstantFunction, LogAbs, PowerLaw, RadiiSet, sample
from core.errors import BadExponentError, BadLambdaError, BadRangeError
from core.grid import Grid, GridFunction
from services.norm_service import (
    beurling_algebra_norm,
    beurling_norm,
    beurling_profile,
    cbmo_norm,
    classical_local_morrey_norm,
    global_morrey_norm,
    homogeneous_beurling_algebra_norm,
    local_morrey_norm,
    oscillation_gap,
    sentinel,
    weak_local_morrey_norm,
)

ORIGIN = (0.0,)

# φ(r) = r^{(λ - n)/p} turns the generalized norm into LM_{p,λ}; here p = 2, λ = 1/2, n = 1
MORREY_WEIGHT = PowerLaw(kappa=-0.25)
MORREY_RADII = RadiiSet(r_min=0.125, r_max=8.0, count=49)


@pytest.fixture
def unit_indicator(line_grid):
    return sample(BallIndicator(rho=1.0), line_grid)


# ========================================================================
# MORREY
# ========================================================================

def test_local_morrey_of_indicator(unit_indicator):
    result = local_morrey_norm(unit_indicator, 2.0, MORREY_WEIGHT, ORIGIN, MORREY_RADII)
    assert math.isclose(result.value, 1.0, rel_tol=0.02)
    step = 2.0 ** (6.0 / 48.0)
    assert 1.0 / step <= result.argmax_radius <= step
    assert not result.boundary_hit
    assert result.truncated_radii == []
    assert len(result.per_radius) == 49


def test_classical_norm_differs_by_volume_factor(unit_indicator):
    generalized = local_morrey_norm(unit_indicator, 2.0, MORREY_WEIGHT, ORIGIN, MORREY_RADII).value
    classical = classical_local_morrey_norm(unit_indicator, 2.0, 0.5, ORIGIN, MORREY_RADII)
    assert math.isclose(classical, generalized * math.sqrt(2.0), rel_tol=1e-9)


def test_weak_morrey_below_strong(unit_indicator):
    strong = local_morrey_norm(unit_indicator, 2.0, MORREY_WEIGHT, ORIGIN, MORREY_RADII)
    weak = weak_local_morrey_norm(unit_indicator, 2.0, MORREY_WEIGHT, ORIGIN, MORREY_RADII)
    assert weak.kind == "weak_local_morrey"
    for w_row, s_row in zip(weak.per_radius, strong.per_radius):
        assert w_row.term <= s_row.term


def test_global_morrey_covers_local(unit_indicator):
    local = local_morrey_norm(unit_indicator, 2.0, MORREY_WEIGHT, ORIGIN, MORREY_RADII)
    glob = global_morrey_norm(unit_indicator, 2.0, MORREY_WEIGHT, [(2.0,), ORIGIN], MORREY_RADII)
    assert glob.kind == "global_morrey"
    assert len(glob.per_radius) == 2 * 49
    assert glob.value == local.value
    assert glob.argmax_center == ORIGIN


def test_zero_function_has_zero_norm(line_grid):
    result = local_morrey_norm(GridFunction.zeros(line_grid), 2.0, MORREY_WEIGHT, ORIGIN, MORREY_RADII)
    assert result.value == 0.0
    assert not result.boundary_hit


def test_flat_profile_hits_the_range_boundary(line_grid):
    one = sample(ConstantFunction(value=1.0), line_grid)
    result = local_morrey_norm(one, 1.0, PowerLaw(kappa=0.0), ORIGIN, RadiiSet(r_min=0.5, r_max=4.0, count=4))
    assert math.isclose(result.value, 1.0, rel_tol=1e-12)
    assert result.boundary_hit


def test_truncated_radii_are_recorded(unit_indicator):
    result = local_morrey_norm(unit_indicator, 2.0, MORREY_WEIGHT, ORIGIN, RadiiSet(r_min=1.0, r_max=16.0, count=5))
    assert result.truncated_radii == [16.0]


def test_morrey_rejects_small_p(unit_indicator):
    with pytest.raises(BadExponentError, match="must be >= 1"):
        local_morrey_norm(unit_indicator, 0.5, MORREY_WEIGHT, ORIGIN, MORREY_RADII)


def test_sentinel():
    assert sentinel(1e13) == math.inf
    assert sentinel(5.0) == 5.0


# ========================================================================
# BEURLING
# ========================================================================

def test_beurling_of_indicator(unit_indicator):
    assert math.isclose(beurling_norm(unit_indicator, 2.0, False, (0, 3)), math.sqrt(2.0), rel_tol=1e-12)
    profile = beurling_profile(unit_indicator, 2.0, False, (0, 3))
    assert [row.term for row in profile.per_radius[1:]] == [0.0, 0.0, 0.0]


def test_beurling_algebra_of_indicator(unit_indicator):
    result = beurling_algebra_norm(unit_indicator, 2.0, 2)
    assert math.isclose(result.value, math.sqrt(2.0), rel_tol=1e-12)
    assert result.remainder_bound == 0.0
    assert len(result.terms) == 3


def test_homogeneous_algebra_of_constant(line_grid):
    # each dyadic annulus contributes 2^{-k/2}·2^{k/2} = 1
    one = sample(ConstantFunction(value=1.0), line_grid)
    result = homogeneous_beurling_algebra_norm(one, 2.0, (-3, 0))
    assert math.isclose(result.value, 4.0, rel_tol=1e-12)


def test_beurling_ranges():
    grid = Grid(dim=1, half_extent=2.0, cells=8)
    f = GridFunction.zeros(grid)
    with pytest.raises(BadRangeError):
        beurling_profile(f, 2.0, True, (2, 1))
    with pytest.raises(BadRangeError):
        beurling_profile(f, 2.0, False, (-1, 1))
    with pytest.raises(BadRangeError):
        beurling_algebra_norm(f, 2.0, -1)
    with pytest.raises(BadExponentError):
        beurling_algebra_norm(f, 1.0, 2)


# ========================================================================
# CENTRAL CAMPANATO
# ========================================================================

@pytest.fixture(scope="module")
def log_symbol():
    return sample(LogAbs(), Grid(dim=1, half_extent=8.0, cells=2 ** 15))


def test_cbmo_of_log(log_symbol):
    # mean oscillation of ln|x| over any centered ball is ∫_0^1 |ln u + 1| du = 2/e
    result = cbmo_norm(log_symbol, 1.0, 0.0, ORIGIN, RadiiSet.dyadic(1.0 / 32.0, 7))
    assert math.isclose(result.value, 2.0 / math.e, rel_tol=0.02)
    terms = np.array([row.term for row in result.per_radius])
    assert terms.max() / terms.min() <= 1.02


def test_cbmo_is_monotone_in_q(log_symbol):
    radii = RadiiSet.dyadic(1.0 / 32.0, 7)
    low = cbmo_norm(log_symbol, 1.0, 0.0, ORIGIN, radii)
    high = cbmo_norm(log_symbol, 2.0, 0.0, ORIGIN, radii)
    for a, b in zip(low.per_radius, high.per_radius):
        assert a.term <= b.term


def test_gap_of_constant_is_zero(line_grid):
    b = sample(ConstantFunction(value=math.pi), line_grid)
    assert oscillation_gap(b, 2.0, 0.25, ORIGIN, 0.5, 2.0) == 0.0


def test_cbmo_lambda_range(line_grid):
    b = sample(ConstantFunction(value=1.0), line_grid)
    with pytest.raises(BadLambdaError, match=r"^bad-lambda: lambda must lie in \[0, 1/1\)"):
        oscillation_gap(b, 1.0, 1.0, ORIGIN, 1.0, 1.0)


def test_cbmo_below_cell_size_counts_as_zero(coarse_line_grid, caplog):
    # h = 1/64, so the nearest cell centers sit at ±1/128
    b = sample(LogAbs(), coarse_line_grid)
    radii = RadiiSet(r_min=1e-3, r_max=1.0, count=31)
    with caplog.at_level("WARNING", logger="services.norm_service"):
        result = cbmo_norm(b, 1.0, 0.0, ORIGIN, radii)
    assert result.per_radius[0].term == 0.0
    assert result.value > 0.0
    assert math.isfinite(result.value)
    assert "no cell centers" in caplog.text
