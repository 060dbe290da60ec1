"""The eleven acceptance criteria, each at its stated tolerance. Every test
prints one PASS/FAIL line; the lines are repeated in the terminal summary."""

import time

import numpy as np
import pytest
from scipy.linalg import eigvalsh_tridiagonal

from gaplab.cocycle import ds_sweep, rotation_numbers, section_residuals, unstable_section
from gaplab.dynamics import Doubling, Solenoid, cat_map, iterate, rotation, sample_points
from gaplab.ids import detect_gaps, dos_estimate, free_ids, ids_eval, spectral_class
from gaplab.labelling import connectedness_verdict, label_group, match_label
from gaplab.oscillation import block_ids, block_sign_flips, count_interpolated_zeros, dirichlet_solution, split_blocks
from gaplab.sampling import SamplingFn, TrigPoly, coefficients, constant, cosine
from gaplab.tridiag import JacobiBlock, build_block, eigenvalues, gauge_reduce

from conftest import GOLDEN, dense

DELTA, MIN_WIDTH = 2e-3, 5e-3


def random_cases(seed, count):
    rng = np.random.default_rng(seed)
    cases = []
    while len(cases) < count:
        m = int(rng.integers(1, 13))
        b = rng.uniform(-2, 2, m)
        a = 2.0 - rng.uniform(0, 2, m - 1)
        ev = np.linalg.eigvalsh(dense(b, a))
        E = float(rng.uniform(ev[0] - 1, ev[-1] + 1))
        if np.min(np.abs(ev - E)) >= 1e-6:
            cases.append((JacobiBlock(b, a), E, int(np.sum(ev > E))))
    return cases


def test_1_oscillation_exactness(acceptance):
    cases = random_cases(2024, 200)
    t = time.perf_counter()
    equal = sum(count_interpolated_zeros(dirichlet_solution(blk, E)) == above for blk, E, above in cases)
    dt = time.perf_counter() - t
    ok = equal == 200 and dt < 5
    acceptance(1, ok, f"oscillation count equals eigencount above E on {equal}/200 blocks in {dt:.2f}s")
    assert ok


def test_2_trailing_independence(acceptance):
    same = 0
    for blk, E, _ in random_cases(77, 100):
        counts = {count_interpolated_zeros(dirichlet_solution(blk, E, t)) for t in (0.1, 1.0, 10.0)}
        same += len(counts) == 1
    ok = same == 100
    acceptance(2, ok, f"zero count independent of trailing coefficient on {same}/100 blocks")
    assert ok


def test_3_gauge_invariance(acceptance):
    rng = np.random.default_rng(3)
    t = time.perf_counter()
    worst = 0.0
    for i in range(100):
        terms = {(k,): complex(*rng.normal(size=2)) for k in range(-2, 3)}
        p = SamplingFn(TrigPoly(1, terms, real=False))
        q = cosine(float(rng.uniform(0.5, 3)))
        sys = rotation(float(rng.uniform(0.05, 0.95)))
        pt = sample_points(sys, i, 1)[0]
        c = coefficients(sys, p, q, pt, (0, 49))
        cm = coefficients(sys, p.modulus(), q, pt, (0, 49))
        got_p = eigenvalues(gauge_reduce(build_block(c)), 1e-13).values
        got_m = eigenvalues(build_block(cm), 1e-13).values
        ref = np.linalg.eigvalsh(dense(c.b, c.a[:-1]))
        worst = max(worst, np.max(np.abs(got_p - got_m)), np.max(np.abs(got_p - ref)))
    dt = time.perf_counter() - t
    ok = worst <= 1e-9 and dt < 10
    acceptance(3, ok, f"J_(p,q) vs J_(|p|,q) eigenvalues max difference {worst:.2e} over 100 instances in {dt:.2f}s")
    assert ok


def test_4_free_ids(acceptance, free_model):
    t = time.perf_counter()
    d = dos_estimate(*free_model, seed=0, S=1, N=5000)
    E = np.linspace(-2, 2, 400)
    err = float(np.max(np.abs(ids_eval(d, E) - free_ids(E))))
    dt = time.perf_counter() - t
    ok = err <= 2e-3 and dt < 60
    acceptance(4, ok, f"free IDS sup error {err:.2e} at N=5000 in {dt:.1f}s")
    assert ok


@pytest.fixture(scope="module")
def amo_run(amo):
    t = time.perf_counter()
    d = dos_estimate(*amo, seed=1, S=8, N=2000)
    gaps = detect_gaps(d, DELTA, MIN_WIDTH)
    return d, sorted(gaps, key=lambda g: -g.width), time.perf_counter() - t


def test_5_quasiperiodic_labels(acceptance, amo, amo_run):
    d, gaps, dt = amo_run
    group = label_group(amo[0])
    top = gaps[:5]
    matches = [match_label(g.label, group, tol=5e-3, M=100) for g in top]
    good = sum(m.residual < 5e-3 for m in matches)
    ok = len(top) == 5 and good == 5 and dt < 300
    desc = ", ".join(f"{g.label:.4f}->m={m.m[0]},n={m.n}" for g, m in zip(top, matches))
    acceptance(5, ok, f"{good}/5 widest gaps matched ({desc}); pipeline {dt:.1f}s")
    assert ok


def test_6_rotation_ids_duality(acceptance, amo, amo_run):
    d, gaps, _ = amo_run
    mids = [g.midpoint for g in gaps[:5]]
    pt = sample_points(amo[0], 11, 1)[0]
    rho = rotation_numbers(mids, *amo, pt, 10_000)
    diff = float(np.max(np.abs(rho - (1 - np.array([g.label for g in gaps[:5]])))))
    ok = len(mids) == 5 and diff <= 1e-2
    acceptance(6, ok, f"max |rotation - (1 - k)| = {diff:.2e} at 5 gap midpoints")
    assert ok


def test_7_splitting_consistency(acceptance, amo, amo_run):
    d, _, _ = amo_run
    E = np.linspace(d.values[0] - 1.0, d.values[-1] + 1.0, 200)
    verdicts = ds_sweep(E, *amo)
    inside, edge = spectral_class(d, E, DELTA)
    keep = edge >= 2 * DELTA
    dominated = np.array([v.status == "dominated" for v in verdicts])
    agree = float(np.mean(dominated[keep] == ~inside[keep]))
    ok = agree >= 0.95
    acceptance(7, ok, f"DS verdict agrees with spectral distance on {agree:.1%} of {keep.sum()} points")
    assert ok


def test_8_singular_blocks(acceptance):
    sys, q = rotation(GOLDEN), cosine(2.0)
    p = SamplingFn(cosine(1.0).base, "clamp_below", 0.5)
    pt = sample_points(sys, 5, 1)[0]
    c = coefficients(sys, p, q, pt, (0, 9999)).gauge_reduced()
    dec = split_blocks(c)
    ev = eigvalsh_tridiagonal(c.b, c.a[:-1])
    E = np.linspace(ev[0] - 0.1, ev[-1] + 0.1, 100)
    diff = float(np.max(np.abs(block_ids(dec, E) - np.searchsorted(ev, E, side="right") / len(ev))))
    rng = np.random.default_rng(8)
    exact = pairs = 0
    while pairs < 500:
        blk = dec.blocks[int(rng.integers(len(dec)))]
        e = float(rng.uniform(ev[0] - 0.1, ev[-1] + 0.1))
        bev = np.linalg.eigvalsh(dense(blk.diag, blk.offdiag))
        if np.min(np.abs(bev - e)) < 1e-9:
            continue
        pairs += 1
        exact += block_sign_flips(blk, e) == int(np.sum(bev > e))
    zeros = [int(n) for n in dec.singular[:100]]
    e1 = sum(unstable_section(float(e), sys, p, q, iterate(sys, pt, n + 1))[0].theta == 0.0
             for n, e in zip(zeros, rng.uniform(-2, 2, len(zeros))))
    ok = diff <= 1e-2 and exact == 500 and e1 == len(zeros) > 0
    acceptance(8, ok, f"block IDS sup difference {diff:.1e}; f_r exact on {exact}/500 pairs; "
                      f"section span(e1) at {e1}/{len(zeros)} zeros")
    assert ok


def test_9_cat_map_connectedness(acceptance):
    sys, p, q = cat_map(), cosine(0.5, (1, 0), 2, 1.0), cosine(1.0, (0, 1), 2)
    d = dos_estimate(sys, p, q, 0, 16, 1500)
    gaps = detect_gaps(d, DELTA, 0.05)
    v = connectedness_verdict(gaps, label_group(sys), 0.05)
    ok = v.connected and v.near_integer
    acceptance(9, ok, f"cat map: {len(gaps)} stable gaps wider than 0.05; labels near integers: {v.near_integer}")
    assert ok


def test_10_doubling_solenoid(acceptance):
    p, q = cosine(0.5, 1, 1, 1.0), cosine(1.0)
    D, S = Doubling(), Solenoid()
    same = all(
        np.array_equal(ca.a, cb.a) and np.array_equal(ca.b, cb.b)
        for a, b in zip(sample_points(D, 0, 4), sample_points(S, 0, 4))
        for ca, cb in [(coefficients(D, p, q, a, (0, 999)), coefficients(S, p, q, b, (0, 999)))]
    )
    d1 = dos_estimate(D, p, q, 0, 16, 1500)
    d2 = dos_estimate(S, p, q, 0, 16, 1500)
    identical = d1.to_csv() == d2.to_csv()
    gaps = detect_gaps(d1, DELTA, 0.05)
    v = connectedness_verdict(gaps, label_group(D, p), 0.05)
    ok = same and identical and v.connected and v.near_integer
    acceptance(10, ok, f"coefficients identical: {same}; DOS byte-identical: {identical}; "
                       f"{len(gaps)} stable gaps wider than 0.05")
    assert ok


def test_11_section_invariance(acceptance, amo, amo_run):
    _, gaps, _ = amo_run
    E = gaps[0].midpoint
    pt = sample_points(amo[0], 12, 1)[0]
    ru = section_residuals(E, *amo, pt, steps=100, kind="unstable").max()
    rs = section_residuals(E, *amo, pt, steps=100, kind="stable").max()
    ok = ru <= 1e-8 and rs <= 1e-8
    acceptance(11, ok, f"widest gap E={E:.4f}: unstable residual {ru:.1e}, stable residual {rs:.1e} over 100 steps")
    assert ok
