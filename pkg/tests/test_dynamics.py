import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gaplab.dynamics import (
    AffineTorus, Doubling, PhasePoint, Solenoid, cat_map, iterate, max_forward_steps, orbit, orbit_coords,
    rotation, sample_points, skew_shift, system_from_dict, system_to_dict,
)
from gaplab.errors import DimensionMismatch, NonInvertible, PrecisionExhausted


def test_cat_map_step():
    pt = PhasePoint.from_coords([0.5, 0.5])
    assert iterate(cat_map(), pt, 1).coords == (0.5, 0.0)


def test_doubling_two_steps():
    pt = PhasePoint.from_coords([0.3], bits=256)
    got = iterate(Doubling(bits=256), pt, 2).coords[0]
    # dyadic rounding of 0.3 happens once, far below double precision
    assert got == pytest.approx(0.2, abs=1e-15)


def test_solenoid_fixed_angle():
    pt = PhasePoint((0,), 256, (0.0, 0.0))
    out = iterate(Solenoid(0.25, bits=256), pt, 1)
    assert out.coords == (0.0,)
    assert out.disk == (0.5, 0.0)


def test_rotation_orbit_matches_fraction_oracle():
    alpha = (math.sqrt(5) - 1) / 2
    sys = rotation(alpha)
    pt = PhasePoint.from_coords([0.1])
    b = Fraction(sys.b_nums(64)[0], 1 << 64)
    w0 = Fraction(pt.nums[0], 1 << 64)
    coords = orbit_coords(sys, pt, -20, 20)[:, 0]
    for i, n in enumerate(range(-20, 21)):
        exact = (w0 + n * b) % 1
        assert coords[i] == pytest.approx(float(exact), abs=2 ** -52)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2 ** 64 - 1), st.integers(0, 2 ** 64 - 1), st.integers(-30, 30))
def test_affine_inverse_roundtrip(x, y, n):
    sys = skew_shift(0.3819660112501051)
    pt = PhasePoint((x, y))
    assert iterate(sys, iterate(sys, pt, n), -n) == pt


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2 ** 64 - 1), st.integers(0, 40), st.integers(0, 40))
def test_iterate_is_a_flow(x, m, n):
    sys = cat_map()
    pt = PhasePoint((x, x // 3))
    assert iterate(sys, iterate(sys, pt, m), n) == iterate(sys, pt, m + n)


def test_doubling_not_invertible():
    with pytest.raises(NonInvertible):
        iterate(Doubling(), PhasePoint((1,), 8192), -1)
    with pytest.raises(NonInvertible):
        orbit_coords(Doubling(), PhasePoint((1,), 8192), -1, 3)


def test_precision_exhausted():
    sys = Doubling(bits=128)
    pt = PhasePoint((12345,), 128)
    assert max_forward_steps(sys, pt) == 75
    orbit_coords(sys, pt, 0, 75)
    with pytest.raises(PrecisionExhausted):
        orbit_coords(sys, pt, 0, 76)


def test_doubling_orbit_exact_over_long_window():
    sys = Doubling()
    pt = sample_points(sys, 3, 1)[0]
    w = orbit_coords(sys, pt, 0, 3000)[:, 0]
    # every coordinate is the float truncation of an exact dyadic orbit point
    assert np.all((w >= 0) & (w < 1))
    np.testing.assert_allclose(np.mod(2 * w[:-1], 1.0), w[1:], atol=2e-16)


def test_sample_points_range_and_determinism():
    sys = AffineTorus(((1, 0), (0, 1)), (0.1, 0.2))
    a = sample_points(sys, 7, 3)
    assert len(a) == 3
    assert all(0 <= c < 1 for p in a for c in p.coords)
    assert a == sample_points(sys, 7, 3)
    assert a != sample_points(sys, 8, 3)


def test_solenoid_points_in_unit_disk_and_share_angles():
    S = Solenoid(0.25)
    pts = sample_points(S, 1, 1000)
    r2 = np.array([x * x + y * y for x, y in (p.disk for p in pts)])
    assert np.all(r2 <= 1.0)
    assert [p.nums for p in pts[:20]] == [p.nums for p in sample_points(Doubling(), 1, 20)]


def test_orbit_list_matches_iterate():
    sys = cat_map()
    pt = sample_points(sys, 0, 1)[0]
    pts = orbit(sys, pt, -3, 3)
    assert pts[0] == iterate(sys, pt, -3)
    assert pts[-1] == iterate(sys, pt, 3)


def test_validation():
    with pytest.raises(ValueError):
        AffineTorus(((2, 0), (0, 1)), (0, 0))
    with pytest.raises(DimensionMismatch):
        AffineTorus(((1,),), (0.1, 0.2))
    with pytest.raises(ValueError):
        Solenoid(0.6)
    with pytest.raises(DimensionMismatch):
        iterate(cat_map(), PhasePoint((1,)), 1)


@pytest.mark.parametrize("sys", [cat_map(), rotation([0.1, 0.2]), Doubling(3, 512), Solenoid(0.3, 512, 10)])
def test_serialisation_roundtrip(sys):
    assert system_from_dict(system_to_dict(sys)) == sys
