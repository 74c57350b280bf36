"""Slope fitting, rational snapping, and the scalar minimizer."""

import math
import random
from fractions import Fraction

import pytest

from arcmetric import geometric_scales, golden_section_min, loglog_slope, snap_to_rational

F = Fraction


def test_exact_power_laws_recover_exponent_to_1e6():
    ts = geometric_scales()
    for alpha in (1.0, 1.5, 2.0, 2.5):
        for c in (0.3, 1.0, 7.5):
            ds = [c * t**alpha for t in ts]
            slope, r2 = loglog_slope(ts, ds)
            assert abs(slope - alpha) < 1e-6
            assert r2 > 1.0 - 1e-9

def test_constant_response_is_perfect_slope_zero():
    ts = geometric_scales()
    slope, r2 = loglog_slope(ts, [3.7] * len(ts))
    assert slope == pytest.approx(0.0, abs=1e-12)
    assert r2 == 1.0

def test_noisy_power_law_stays_within_snap_tolerance():
    rng = random.Random(9)
    ts = geometric_scales()
    ds = [t**1.5 * (1.0 + 0.01 * (rng.random() - 0.5)) for t in ts]
    slope, r2 = loglog_slope(ts, ds)
    assert abs(slope - 1.5) < 0.01
    assert r2 > 0.999

def test_loglog_slope_input_validation():
    with pytest.raises(ValueError):
        loglog_slope([0.5], [0.5])
    with pytest.raises(ValueError):
        loglog_slope([0.5, 0.25], [0.5])


def test_snap_prefers_nearest_small_denominator():
    assert snap_to_rational(1.4998) == F(3, 2)
    assert snap_to_rational(0.3338) == F(1, 3)
    assert snap_to_rational(0.75) == F(3, 4)
    assert snap_to_rational(2.0) == 2
    # nearest denominator-limited fraction wins even when it looks exotic
    assert snap_to_rational(1.3549) == F(15, 11)

def test_snap_rejects_outside_tolerance():
    assert snap_to_rational(1.414, tolerance=0.001) is None
    assert snap_to_rational(1.03, tolerance=0.01) is None
    assert snap_to_rational(1.03, tolerance=0.05) == 1


def test_golden_section_quadratic():
    xm, fm = golden_section_min(lambda x: (x - 0.3) ** 2, 0.0, 1.0)
    assert xm == pytest.approx(0.3, abs=1e-8)
    assert fm == pytest.approx(0.0, abs=1e-15)

def test_golden_section_boundary_minimum():
    xm, _ = golden_section_min(lambda x: x, 2.0, 5.0)
    assert xm == pytest.approx(2.0, abs=1e-6)

def test_golden_section_asymmetric_valley():
    fn = lambda x: abs(x - 0.125) ** 1.3 + 2.0
    xm, fm = golden_section_min(fn, 0.0, 1.0)
    assert xm == pytest.approx(0.125, abs=1e-7)
    assert fm == pytest.approx(2.0, abs=1e-9)

def test_golden_section_rejects_empty_interval():
    with pytest.raises(ValueError):
        golden_section_min(math.sin, 1.0, 1.0)


def test_geometric_scales_default_window():
    ts = geometric_scales()
    assert len(ts) == 11
    assert ts[0] == 2.0**-4
    assert ts[-1] == 2.0**-14
    assert all(a > b for a, b in zip(ts, ts[1:]))

def test_geometric_scales_custom_and_invalid():
    assert geometric_scales(2, 4, 0.1) == pytest.approx((0.01, 0.001, 0.0001))
    with pytest.raises(ValueError):
        geometric_scales(5, 4)
    with pytest.raises(ValueError):
        geometric_scales(4, 5, base=1.0)
