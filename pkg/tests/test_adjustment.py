import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from neoclassical.adjustment import (
    IntervalSpec,
    adjust_critical_value,
    adjusted_interval,
    adjusted_to_nominal,
    asymptotic_unadjusted_coverage,
    conversion_curve,
    nominal_to_adjusted,
    unadjusted_interval,
)
from neoclassical.errors import DomainError

mp.mp.dps = 30


def mp_nominal_to_adjusted(a):
    u = mp.sqrt(2) * mp.erfinv(1 - mp.mpf(a))  # u_{1-a/2}
    return float(mp.erfc(u / mp.sqrt(2) / mp.sqrt(2)))


def mp_adjusted_to_nominal(a):
    u = mp.sqrt(2) * mp.erfinv(1 - mp.mpf(a))
    return float(mp.erfc(mp.sqrt(2) * u / mp.sqrt(2)))


def test_intervals():
    lo, hi = unadjusted_interval(0, 1, 0.05)
    assert (lo, hi) == (pytest.approx(-1.959964, abs=1e-6), pytest.approx(1.959964, abs=1e-6))
    assert unadjusted_interval(2, 0.1, 0.32) == (pytest.approx(1.9006, abs=1e-4), pytest.approx(2.0994, abs=1e-4))
    assert adjusted_interval(0, 1, 0.05)[1] == pytest.approx(2.7718, abs=1e-4)
    assert unadjusted_interval(3.0, 0.0, 0.2) == (3.0, 3.0)
    assert adjusted_interval(3.0, 0.0, 0.2) == (3.0, 3.0)
    with pytest.raises(DomainError):
        unadjusted_interval(0, 1, 1.0)
    with pytest.raises(DomainError):
        IntervalSpec(0.0, -1.0, 0.9)


@settings(max_examples=50)
@given(st.floats(-1e3, 1e3), st.floats(1e-6, 1e3), st.floats(1e-4, 0.999))
def test_width_ratio(c, se, a):
    plain = IntervalSpec(c, se, 1 - a, adjusted=False)
    adj = IntervalSpec(c, se, 1 - a, adjusted=True)
    assert adj.half_width / plain.half_width == pytest.approx(math.sqrt(2), rel=1e-12)
    lo, hi = unadjusted_interval(c, se, a)
    alo, ahi = adjusted_interval(c, se, a)
    assert alo <= lo <= hi <= ahi


def test_nominal_to_adjusted_printed():
    assert nominal_to_adjusted(0.05) == pytest.approx(0.166, abs=1e-3)
    assert nominal_to_adjusted(0.01) == pytest.approx(0.069, abs=1e-3)
    assert nominal_to_adjusted(1.0) == 1.0
    with pytest.raises(DomainError):
        nominal_to_adjusted(0.0)


def test_adjusted_to_nominal_printed():
    assert adjusted_to_nominal(0.1) == pytest.approx(0.020, abs=1e-3)
    assert adjusted_to_nominal(0.05) == pytest.approx(0.0056, abs=3e-4)
    assert adjusted_to_nominal(0.01) == pytest.approx(2.7e-4, abs=2e-5)


@pytest.mark.parametrize("a", [1e-6, 0.001, 0.01, 0.05, 0.1, 0.32, 0.5, 0.9])
def test_conversions_vs_mpmath(a):
    assert nominal_to_adjusted(a) == pytest.approx(mp_nominal_to_adjusted(a), rel=1e-12)
    assert adjusted_to_nominal(a) == pytest.approx(mp_adjusted_to_nominal(a), rel=1e-10)


def test_critical_value():
    assert adjust_critical_value(1.96) == pytest.approx(2.77, abs=0.01)
    assert adjust_critical_value(0.0) == 0.0
    assert adjust_critical_value(2.576) == pytest.approx(3.643, abs=1e-3)
    with pytest.raises(DomainError):
        adjust_critical_value(-1.0)


@pytest.mark.parametrize("a", [0.01, 0.05, 0.1, 0.32])
def test_asymptotic_coverage(a):
    u = mp.sqrt(2) * mp.erfinv(1 - mp.mpf(a))
    assert asymptotic_unadjusted_coverage(a) == pytest.approx(float(mp.erf(u / 2)), rel=1e-13)
    assert asymptotic_unadjusted_coverage(a) < 1 - a


def test_asymptotic_coverage_rounded():
    # 0.83422 at .05: the often-quoted .8341 comes from rounding u/sqrt(2) to 1.386 first
    assert asymptotic_unadjusted_coverage(0.05) == pytest.approx(0.83422, abs=1e-5)
    assert asymptotic_unadjusted_coverage(0.32) == pytest.approx(0.5181, abs=1e-4)
    assert asymptotic_unadjusted_coverage(0.01) == pytest.approx(0.9314, abs=1e-4)


@settings(max_examples=100)
@given(st.floats(1e-8, 1.0, exclude_min=True))
def test_round_trip_and_order(a):
    assert nominal_to_adjusted(adjusted_to_nominal(a)) == pytest.approx(a, abs=1e-9)
    assert nominal_to_adjusted(a) >= a
    assert adjusted_to_nominal(a) <= a + 1e-15  # one ulp near 1
    if a < 1:
        assert abs(asymptotic_unadjusted_coverage(a) + nominal_to_adjusted(a) - 1) <= 1e-12


def test_curve():
    c = conversion_curve()
    assert c.shape == (512, 2)
    assert np.all(np.diff(c[:, 0]) > 0) and np.all(np.diff(c[:, 1]) > 0)
    assert tuple(c[-1]) == (1.0, 1.0)
    assert nominal_to_adjusted(1e-100) < 1e-40
    assert conversion_curve([0.05])[0, 1] == pytest.approx(0.166, abs=1e-3)
