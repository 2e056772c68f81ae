"""Acceptance gate: one test per criterion, each printing a PASS/FAIL line.

Run with `pytest tests/test_acceptance.py -v -s` to see the per-criterion
lines and timings.
"""

import itertools
import json
import time

import numpy as np
import pytest

from paritylab.bp import success_probability, validate_affine
from paritylab.cli import dispatch
from paritylab.crypto import (
    decode_stream,
    encode_stream,
    keygen,
    run_attack,
    window_attacker,
)
from paritylab.generators import (
    greedy_recorder_program,
    learner_program_with_labels,
    random_program,
    selective_recorder_program,
)
from paritylab.gf2 import BitVector, contains, parity
from paritylab.learners import (
    estimate_sample_complexity,
    exhaustive_learner,
    exhaustive_success_exact,
    gaussian_learner,
    learner_to_bp,
    rank_success_probability,
    simulate_success,
)
from paritylab.bp import output_dimension_distribution
from paritylab.reduction import ReductionParams, reduce_to_affine
from paritylab.suites import (
    fourier_suite,
    partition_suite,
    reach_bound_suite,
    reduction_suite,
)

SEED = 20240917


def report(idx, ok, detail, elapsed=None):
    status = "PASS" if ok else "FAIL"
    timing = f" [{elapsed:.1f}s]" if elapsed is not None else ""
    print(f"\nACCEPTANCE {idx}: {status} — {detail}{timing}")


def test_criterion_1_fourier_closeness():
    start = time.time()
    rep = fourier_suite(200, SEED, ns=(3, 4, 5, 6), r_fracs=(0.5, 0.75, 1.0))
    elapsed = time.time() - start
    ok = rep["ok"] and rep["passed"] == 200 and elapsed < 10.0
    report(1, ok, f"{rep['passed']}/200 mixtures inside the l1 bound, "
                  f"min margin {rep['min_margin']:.3g}", elapsed)
    assert rep["passed"] == 200, rep["failures"][:3]
    assert elapsed < 10.0


def test_criterion_2_partition_properties():
    start = time.time()
    rep = partition_suite(100, SEED, ns=(2, 3, 4, 5), r_fracs=(0.5, 0.75, 1.0))
    elapsed = time.time() - start
    ok = rep["ok"] and rep["passed"] == 100 and elapsed < 30.0
    report(2, ok, f"{rep['passed']}/100 mixtures satisfy all four grouping "
                  f"properties, worst residual {rep['worst_residual']:.3g}", elapsed)
    assert rep["passed"] == 100, rep["failures"][:3]
    assert elapsed < 30.0


def test_criterion_3_reduction_bounds():
    start = time.time()
    rep = reduction_suite(50, SEED, ns=(2, 3, 4), m_max=3, width_max=8)
    elapsed = time.time() - start
    ok = rep["ok"] and rep["passed"] == 50 and elapsed < 120.0
    report(3, ok, f"{rep['passed']}/50 random programs reduce to verified "
                  f"affine programs", elapsed)
    assert rep["passed"] == 50, rep["failures"][:1]
    assert elapsed < 120.0


def test_criterion_4_reach_probability_bound():
    start = time.time()
    rep = reach_bound_suite(SEED, ns=(2, 3, 4))
    elapsed = time.time() - start
    ok = rep["ok"]
    report(4, ok, f"{rep['passed']}/{rep['count']} minimum-dimension vertices "
                  f"below the reach bound, min margin {rep['min_margin']:.3g}", elapsed)
    assert rep["ok"], rep["failures"][:3]


def test_criterion_5_soundness_exhaustive():
    start = time.time()
    n, m = 3, 3
    corpus = [
        greedy_recorder_program(n, m, 0),
        greedy_recorder_program(n, m, 1),
        greedy_recorder_program(n, m, 2),
        selective_recorder_program(n, m, trigger=1),
        learner_program_with_labels(gaussian_learner(n), m),
    ]
    red = reduce_to_affine(random_program(n, m, 4, np.random.default_rng(SEED)),
                           ReductionParams(float(n)))
    corpus.append((red.program, red.labels))

    paths_checked = 0
    for bp, labels in corpus:
        assert validate_affine(bp, labels).ok
        assert abs(success_probability(bp) - 1.0) <= 1e-12
        for x in range(1 << n):
            xv = BitVector(n, x)
            for a_seq in itertools.product(range(1 << n), repeat=m):
                t, v = 0, 0
                assert contains(labels.get(t, v), xv)
                for a in a_seq:
                    if bp.is_leaf(t, v):
                        break
                    v = bp.transitions[t][v][(a << 1) | parity(a & x)]
                    t += 1
                    assert contains(labels.get(t, v), xv)
                paths_checked += 1
    elapsed = time.time() - start
    report(5, True, f"{paths_checked} exhaustive paths stay inside their "
                    f"labels; affine success exactly 1 on {len(corpus)} programs",
           elapsed)


def test_criterion_6_learning_anchor():
    start = time.time()
    bp = learner_to_bp(gaussian_learner(2), 2)
    point_prob = output_dimension_distribution(bp).get(0, 0.0)
    exact_ok = abs(point_prob - 3 / 8) <= 1e-12

    n, m, trials = 8, 12, 100_000
    hits = simulate_success(gaussian_learner(n), m, trials,
                            np.random.default_rng(SEED + 6))
    p = rank_success_probability(n, m)
    sigma = (p * (1 - p) / trials) ** 0.5
    mc_ok = abs(hits / trials - p) <= 3 * sigma
    elapsed = time.time() - start
    ok = exact_ok and mc_ok and elapsed < 60.0
    report(6, ok, f"exact point-recovery 3/8 at n=2,m=2 ({point_prob}); "
                  f"n=8 MC {hits / trials:.4f} vs formula {p:.4f} "
                  f"(3 sigma = {3 * sigma:.4f})", elapsed)
    assert exact_ok and mc_ok
    assert elapsed < 60.0


def test_criterion_7_tradeoff_anchor():
    """Exhaustive-vs-Gaussian sample-complexity ratio at n=8, target 0.9.

    The exact dynamic program puts the candidate-cycling learner's 0.9
    quantile near 483 samples (256 candidates, about two samples per
    rejected candidate, plus 24 confirmations) while full row reduction
    needs 12, so the true ratio is close to 40; the >= 50 assertion below
    records the stated threshold faithfully.
    """
    start = time.time()
    target, trials = 0.9, 1500
    gauss = estimate_sample_complexity(
        gaussian_learner(8), target, np.random.default_rng(SEED + 7),
        trials=trials, seed=SEED)
    exhaustive = estimate_sample_complexity(
        exhaustive_learner(8, 24), target, np.random.default_rng(SEED + 8),
        trials=trials, m_cap=1 << 12, seed=SEED)
    ratio = exhaustive.m / gauss.m

    dp_quantile = next(m for m in range(1, 1 << 12)
                       if exhaustive_success_exact(8, 24, m) >= target)
    elapsed = time.time() - start
    ok = ratio >= 50.0 and elapsed < 300.0
    report(7, ok, f"measured m: exhaustive {exhaustive.m} vs gaussian {gauss.m}, "
                  f"ratio {ratio:.1f} (exact-DP 0.9-quantile {dp_quantile}, "
                  f"ratio threshold 50)", elapsed)
    assert elapsed < 300.0
    assert ratio >= 50.0, (
        f"ratio {ratio:.1f} < 50: the exact chain analysis gives "
        f"{dp_quantile}/{12} ≈ {dp_quantile / 12:.1f} at n=8, T=24")


def test_criterion_8_crypto():
    start = time.time()
    rng = np.random.default_rng(SEED + 9)
    key = keygen(9, rng)
    for i in range(1000):
        size = int(rng.integers(0, 64)) if i else 4096
        payload = bytes(rng.integers(0, 256, size, dtype=np.uint8))
        assert decode_stream(key, encode_stream(key, payload, rng)) == payload

    n = 6
    wide = window_attacker(n, 3 * n * (n + 1))       # capacity 18 >= n
    trials = 3000
    rep = run_attack(wide, m=3 * n, trials=trials, rng=np.random.default_rng(SEED + 10))
    p = rank_success_probability(n, 3 * n)
    sigma_wide = max((p * (1 - p) / trials) ** 0.5, 1e-9)
    wide_ok = abs(rep.key_guess_rate - p) <= 3 * sigma_wide

    blind = window_attacker(n, 0)
    trials0 = 30_000
    rep0 = run_attack(blind, m=4, trials=trials0, rng=np.random.default_rng(SEED + 11))
    p0 = 2.0 ** (-n)
    sigma0 = (p0 * (1 - p0) / trials0) ** 0.5
    blind_ok = abs(rep0.key_guess_rate - p0) <= 3 * sigma0

    elapsed = time.time() - start
    ok = wide_ok and blind_ok and elapsed < 120.0
    report(8, ok, f"1000 payload round-trips; capacity-18 rate "
                  f"{rep.key_guess_rate:.5f} vs rank formula {p:.5f}; "
                  f"capacity-0 rate {rep0.key_guess_rate:.5f} vs {p0:.5f}; "
                  f"memory assertions never tripped", elapsed)
    assert wide_ok and blind_ok
    assert elapsed < 120.0


def test_criterion_9_cli_determinism(tmp_path):
    start = time.time()
    cases = [
        ("verify-lemmas", "--n", "4", "--r", "3", "--seed", "7", "--trials", "20"),
        ("tradeoff", "--n", "4", "--learners", "gaussian,prefix",
         "--target", "0.8", "--trials", "300", "--seed", "7"),
        ("crypto", "keygen", "--n", "16", "--seed", "7"),
        ("crypto", "attack", "--n", "5", "--memory-bits", "30", "--m", "8",
         "--trials", "400", "--seed", "7"),
        ("bounds", "--n", "6", "--k", "4", "--m", "3"),
    ]
    identical = 0
    for idx, case in enumerate(cases):
        out1 = tmp_path / f"run_a_{idx}.out"
        out2 = tmp_path / f"run_b_{idx}.out"
        assert dispatch(list(case) + ["--out", str(out1)]) == 0
        assert dispatch(list(case) + ["--out", str(out2)]) == 0
        assert out1.read_bytes() == out2.read_bytes()
        identical += 1
    elapsed = time.time() - start
    report(9, True, f"{identical}/{len(cases)} repeated CLI runs produced "
                    f"byte-identical outputs", elapsed)
