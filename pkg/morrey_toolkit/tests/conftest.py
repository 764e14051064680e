"""
tests/conftest.py
-----------------
Puts the toolkit root on sys.path and shares the small fixtures most test
modules need.
"""

import os
import sys

import pytest
from hypothesis import HealthCheck, settings as hyp_settings

# the per-sample subnormal filter in test_invariants trips this check at random
hyp_settings.register_profile("default", suppress_health_check=[HealthCheck.filter_too_much])
hyp_settings.load_profile("default")

# Add the parent directory to Python path
sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from core.catalog import RadiiSet  # noqa: E402
from core.grid import Grid  # noqa: E402


@pytest.fixture
def line_grid():
    """dim 1, R = 8, h = 1/256: cell edges land on every dyadic radius >= h."""
    return Grid(dim=1, half_extent=8.0, cells=4096)


@pytest.fixture
def coarse_line_grid():
    return Grid(dim=1, half_extent=8.0, cells=1024)


@pytest.fixture
def plane_grid():
    return Grid(dim=2, half_extent=4.0, cells=64)


@pytest.fixture
def wide_radii():
    """r in [1e-2, 1e2], 10 points per decade."""
    return RadiiSet(r_min=1e-2, r_max=1e2, count=41)
