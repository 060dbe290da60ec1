import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gaplab.dynamics import Doubling, PhasePoint, Solenoid, rotation, sample_points
from gaplab.errors import DimensionMismatch, NonInvertible
from gaplab.sampling import (
    SamplingFn, TrigPoly, coefficients, constant, cosine, evaluate, exponential, sampling_from_dict,
    sampling_to_dict,
)

ALPHA = (math.sqrt(5) - 1) / 2


def test_eval_examples():
    rot = rotation(ALPHA)
    assert evaluate(cosine(2.0), rot, PhasePoint.from_coords([0.0])) == 2.0
    assert evaluate(exponential(1), rot, PhasePoint.from_coords([0.25])) == pytest.approx(1j, abs=1e-15)
    clamp = SamplingFn(cosine(1.0).base, "clamp_below", 0.5)
    assert evaluate(clamp, rot, PhasePoint.from_coords([0.5])) == 0.0


def test_coefficients_direct():
    c = coefficients(rotation(ALPHA), constant(1.0), cosine(2.0), PhasePoint((0,)), (0, 2))
    np.testing.assert_array_equal(c.a, [1.0, 1.0, 1.0])
    np.testing.assert_allclose(c.b, [2.0, 2 * math.cos(2 * math.pi * ALPHA), 2 * math.cos(4 * math.pi * ALPHA)],
                               atol=1e-14)


def test_doubling_negative_window():
    with pytest.raises(NonInvertible):
        coefficients(Doubling(), constant(1.0), cosine(2.0), PhasePoint((1,), 8192), (-1, 5))


def test_solenoid_lift_coincides_with_doubling():
    p, q = cosine(0.5, 1, 1, 1.0), cosine(2.0)
    for a, b in zip(sample_points(Doubling(), 4, 3), sample_points(Solenoid(), 4, 3)):
        c1 = coefficients(Doubling(), p, q, a, (0, 50))
        c2 = coefficients(Solenoid(), p, q, b, (0, 50))
        assert np.array_equal(c1.a, c2.a) and np.array_equal(c1.b, c2.b)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.tuples(st.integers(-3, 3), st.integers(-3, 3), st.floats(-2, 2), st.floats(-2, 2)),
                min_size=1, max_size=5),
       st.floats(0, 1, exclude_max=True), st.floats(0, 1, exclude_max=True))
def test_trigpoly_matches_direct_sum(terms, x, y):
    table = {}
    for k1, k2, re, im in terms:
        table[(k1, k2)] = table.get((k1, k2), 0) + complex(re, im)
    f = TrigPoly(2, table, real=False)
    direct = sum(c * np.exp(2j * np.pi * (k[0] * x + k[1] * y)) for k, c in table.items())
    assert f(np.array([x, y])) == pytest.approx(direct, abs=1e-12)


def test_real_trigpoly_needs_hermitian_table():
    with pytest.raises(ValueError):
        TrigPoly(1, {(1,): 1.0}, real=True)


def test_postmaps():
    w = np.linspace(0, 1, 50, endpoint=False)[:, None]
    base = cosine(1.0)
    np.testing.assert_allclose(SamplingFn(base.base, "clamp_below", 0.5)(w),
                               np.maximum(0, np.cos(2 * np.pi * w[:, 0]) - 0.5), atol=1e-15)
    e = exponential(1, 1, 0.5 + 0.5j)
    np.testing.assert_allclose(e.modulus()(w), np.full(50, abs(0.5 + 0.5j)))
    with pytest.raises(ValueError):
        SamplingFn(e.base, "clamp_below", 0.1)


def test_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        coefficients(rotation([0.1, 0.2]), constant(1.0), cosine(1.0), PhasePoint((0, 0)), (0, 3))


@pytest.mark.parametrize("f", [cosine(1.5, (1, -2), 2, 0.3), exponential(2, 1, 0.3 - 0.1j),
                               SamplingFn(cosine(1.0).base, "clamp_below", 0.5)])
def test_dict_roundtrip(f):
    assert sampling_from_dict(sampling_to_dict(f)) == f
