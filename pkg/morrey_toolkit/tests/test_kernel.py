"""
tests/test_kernel.py
--------------------
Rough kernel catalog: sphere norms, cancellation and the kernel-info summary.
"""

import math

import pytest

from core.errors import BadConfigError, BadExponentError, NotADirectionError
from core.kernel import (
    AngularTableKernel,
    ConstantKernel,
    HarmonicKernel,
    SignPairKernel,
    absolute,
    cancellation_defect,
    dual_exponent,
    eval_kernel,
    kernel_info,
    sphere_lnorm,
    spherical_mean,
)


# ========================================================================
# SPHERE NORMS
# ========================================================================

def test_constant_kernel_sphere_norm():
    k = ConstantKernel(dim=2)
    assert math.isclose(sphere_lnorm(k, 2.0), math.sqrt(2.0 * math.pi), rel_tol=1e-12)
    assert sphere_lnorm(k, math.inf) == 1.0


def test_harmonic_sphere_norm():
    k = HarmonicKernel(kind="cos", k=1)
    assert math.isclose(sphere_lnorm(k, 2.0), math.sqrt(math.pi), rel_tol=1e-9)
    assert sphere_lnorm(k, math.inf) == 1.0


def test_sign_pair_norm_in_dim1():
    k = SignPairKernel(a_plus=3.0, a_minus=-4.0)
    assert math.isclose(sphere_lnorm(k, 2.0), 5.0, rel_tol=1e-12)
    assert sphere_lnorm(k, math.inf) == 4.0


@pytest.mark.parametrize("s", [1.0, 0.5])
def test_sphere_exponent_must_exceed_one(s):
    with pytest.raises(BadExponentError):
        sphere_lnorm(ConstantKernel(dim=1), s)


def test_dual_exponent():
    assert dual_exponent(2.0) == 2.0
    assert dual_exponent(4.0) == 4.0 / 3.0
    assert dual_exponent(math.inf) == 1.0


# ========================================================================
# CANCELLATION
# ========================================================================

def test_defects():
    assert cancellation_defect(ConstantKernel(dim=1)) == 2.0
    assert cancellation_defect(SignPairKernel(a_plus=1.0, a_minus=-1.0)) == 0.0
    assert cancellation_defect(HarmonicKernel(kind="sin", k=3)) == 0.0


def test_absolute_harmonic_does_not_cancel():
    k = absolute(HarmonicKernel(kind="cos", k=1))
    # ∫ |cos θ| dθ over the circle
    assert math.isclose(cancellation_defect(k), 4.0, rel_tol=1e-6)
    assert math.isclose(spherical_mean(k), 2.0 / math.pi, rel_tol=1e-6)


def test_absolute_keeps_shape():
    assert absolute(SignPairKernel(a_plus=1.0, a_minus=-2.0)) == SignPairKernel(a_plus=1.0, a_minus=2.0)
    assert absolute(ConstantKernel(dim=2, c=-3.0)).c == 3.0
    table = absolute(AngularTableKernel(values=(1.0, -1.0, 2.0, -2.0)))
    assert table.values_table == (1.0, 1.0, 2.0, 2.0)


def test_angular_table_needs_four_cells():
    with pytest.raises(BadConfigError):
        AngularTableKernel(values=(1.0, -1.0, 1.0))


def test_angular_table_lookup_and_defect():
    k = AngularTableKernel(values=(1.0, -1.0, 1.0, -1.0))
    assert cancellation_defect(k) == 0.0
    assert eval_kernel(k, (1.0, 0.0)) == 1.0
    assert eval_kernel(k, (0.0, 1.0)) == -1.0
    assert eval_kernel(k, (-1.0, 0.0)) == 1.0


# ========================================================================
# EVALUATION
# ========================================================================

def test_eval_kernel_on_directions():
    k = HarmonicKernel(kind="cos", k=2)
    assert math.isclose(eval_kernel(k, (1.0, 0.0)), 1.0)
    assert math.isclose(eval_kernel(k, (0.0, 1.0)), -1.0)
    assert eval_kernel(SignPairKernel(a_plus=2.0, a_minus=5.0), (-1.0,)) == 5.0


@pytest.mark.parametrize("direction", [(1.0, 1.0), (0.0, 0.0), (1.0,)])
def test_eval_kernel_rejects_non_directions(direction):
    with pytest.raises(NotADirectionError):
        eval_kernel(HarmonicKernel(), direction)


def test_kernel_info_summary():
    info = kernel_info(HarmonicKernel(kind="cos", k=1))
    assert set(info.sphere_norms) == {"2.0", "4.0", "inf"}
    assert info.cancelling
    assert info.spherical_mean == 0.0

    info = kernel_info(ConstantKernel(dim=1), [2.0])
    assert not info.cancelling
    assert info.spherical_mean == 1.0
    assert math.isclose(info.sphere_norms["2.0"], math.sqrt(2.0))
