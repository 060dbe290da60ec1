import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gaplab.dynamics import rotation, sample_points
from gaplab.ids import (
    DosEstimate, Gap, detect_gaps, dos_estimate, free_ids, ids_eval, spectral_class, spectrum_approx,
)
from gaplab.sampling import SamplingFn, TrigPoly, constant, cosine

from conftest import GOLDEN


def test_free_small_atoms(free_model):
    d = dos_estimate(*free_model, seed=0, S=1, N=3)
    np.testing.assert_allclose(d.values, [-math.sqrt(2), 0.0, math.sqrt(2)], atol=1e-10)
    np.testing.assert_allclose(d.weights, [1 / 3] * 3)
    assert ids_eval(d, 0.0 + 1e-9) == pytest.approx(2 / 3)
    assert ids_eval(d, -5.0) == 0.0
    assert ids_eval(d, 5.0) == pytest.approx(1.0)


def test_one_site_truncations_sample_q():
    sys, q = rotation(GOLDEN), cosine(2.0)
    d = dos_estimate(sys, constant(1.0), q, seed=3, S=6, N=1)
    ref = np.sort([q(np.array(p.coords)) for p in sample_points(sys, 3, 6)])
    np.testing.assert_allclose(d.values, ref, atol=1e-15)
    np.testing.assert_allclose(d.weights, 1 / 6)


def test_complex_p_equals_modulus():
    sys = rotation(0.3)
    p = SamplingFn(TrigPoly(1, {(1,): 0.7 + 0.2j, (0,): 0.4, (-2,): -0.3j}, real=False))
    q = cosine(1.5)
    a = dos_estimate(sys, p, q, 2, 3, 60)
    b = dos_estimate(sys, p.modulus(), q, 2, 3, 60)
    np.testing.assert_allclose(a.values, b.values, atol=1e-9)


def test_free_large(free_model):
    d = dos_estimate(*free_model, seed=0, S=1, N=5000)
    assert ids_eval(d, 0.0) == pytest.approx(0.5, abs=2e-3)
    iv = spectrum_approx(d, 0.01)
    assert len(iv) == 1 and iv[0][0] <= -1.99 and iv[0][1] >= 1.99
    assert detect_gaps(d, 0.01, 0.05) == []
    E = np.linspace(-2, 2, 400)
    assert np.max(np.abs(ids_eval(d, E) - free_ids(E))) <= 2e-3


def test_one_atom_interval():
    d = DosEstimate(np.array([0.25]), np.array([1.0]), 1, 1, 0)
    assert spectrum_approx(d, 0.1) == [(0.15, 0.35)]


def test_diagonal_operator_has_no_interior_gaps():
    sys = rotation(GOLDEN)
    d = dos_estimate(sys, constant(0.0), cosine(2.0), 0, 4, 500)
    assert detect_gaps(d, 0.01, 0.05) == []
    lo, hi = spectrum_approx(d, 0.01)[0]
    assert lo < -1.98 and hi > 1.98


def test_amo_gaps_and_spectrum(amo):
    d = dos_estimate(*amo, seed=1, S=4, N=1000)
    assert len(spectrum_approx(d, 2e-3)) >= 5
    gaps = detect_gaps(d, 2e-3, 5e-3)
    widest = max(gaps, key=lambda g: g.width)
    frac = GOLDEN % 1.0
    assert min(abs(widest.label - frac), abs(widest.label - (1 - frac))) < 5e-3


def test_stability_filter_drops_vanishing_gap():
    # a spurious hole at N that is filled in the stability estimate
    base = DosEstimate(np.array([0.0, 0.001, 0.002, 0.5, 0.501, 0.502]), np.full(6, 1 / 6), 6, 1, 0)
    filled = DosEstimate(np.array([0.0, 0.001, 0.25, 0.2501, 0.2502, 0.5, 0.501]), np.full(7, 1 / 7), 7, 1, 0)
    assert len(detect_gaps(base, 0.01, 0.05, stability=False)) == 1
    assert detect_gaps(base, 0.01, 0.05, stability=filled) == []


def test_isolated_atoms_do_not_split_gaps():
    vals = np.concatenate([np.linspace(-1, 0, 50), [0.5], np.linspace(1, 2, 50)])
    d = DosEstimate(vals, np.full(101, 1 / 101), 101, 1, 0)
    gaps = detect_gaps(d, 0.02, 0.05, stability=False)
    assert len(gaps) == 1 and gaps[0].lo < 0.1 and gaps[0].hi > 0.9
    assert len(detect_gaps(d, 0.02, 0.05, stability=False, edge_weight=0.0)) == 2


def test_detect_gaps_validates():
    d = DosEstimate(np.array([0.0]), np.array([1.0]), 1, 1, 0)
    with pytest.raises(ValueError):
        detect_gaps(d, 0.1, 0.1)
    with pytest.raises(ValueError):
        Gap(1.0, 0.5, 0.3)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(-5, 5), min_size=1, max_size=40), st.floats(-6, 6), st.floats(-6, 6))
def test_ids_is_monotone_step_function(vals, x, y):
    w = np.full(len(vals), 1 / len(vals))
    d = DosEstimate(np.array(vals), w, len(vals), 1, 0)
    lo, hi = min(x, y), max(x, y)
    assert 0.0 <= ids_eval(d, lo) <= ids_eval(d, hi) <= 1.0 + 1e-12
    assert ids_eval(d, lo) == pytest.approx(sum(v <= lo for v in vals) / len(vals))


@settings(max_examples=30, deadline=None)
@given(st.lists(st.floats(-5, 5), min_size=1, max_size=40), st.floats(0.001, 0.5))
def test_spectrum_approx_covers_atoms(vals, delta):
    d = DosEstimate(np.array(vals), np.full(len(vals), 1 / len(vals)), len(vals), 1, 0)
    iv = spectrum_approx(d, delta)
    assert all(a < b for a, b in iv)
    assert all(iv[i][1] < iv[i + 1][0] for i in range(len(iv) - 1))
    assert all(any(a <= v <= b for a, b in iv) for v in vals)


def test_order_independent_merge(amo):
    a = dos_estimate(*amo, seed=4, S=3, N=100, workers=1)
    b = dos_estimate(*amo, seed=4, S=3, N=100, workers=3)
    assert a.to_csv() == b.to_csv()


def test_spectral_class(free_model):
    d = DosEstimate(np.array([0.0, 1.0]), np.array([0.5, 0.5]), 2, 1, 0)
    inside, edge = spectral_class(d, [0.0, 0.5, 1.05], 0.1)
    assert inside.tolist() == [True, False, True]
    np.testing.assert_allclose(edge, [0.1, 0.4, 0.05])
