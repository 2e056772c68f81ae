import json

import numpy as np
import pytest

from paritylab.bp import BranchingProgram, to_json_dict, validate_affine
from paritylab.generators import random_program
from paritylab.gf2 import AffineSubspace, BitVector, intersect_hyperplane
from paritylab.reduction import ReductionParams, reduce_to_affine, verify_reduction

bv = BitVector.from_string


def record_first_sample_program(n):
    full = AffineSubspace.full(n)
    deg = 1 << (n + 1)
    labels = {}
    for idx in range(deg):
        a, b = idx >> 1, idx & 1
        labels[(1, idx)] = (intersect_hyperplane(full, BitVector(n, a), b)
                            if a else full)
    return BranchingProgram(n, 1, (1, deg), ((tuple(range(deg)),),), labels)


class TestParams:
    def test_range_enforced(self):
        with pytest.raises(ValueError):
            ReductionParams(0.5).validate(4)
        with pytest.raises(ValueError):
            ReductionParams(5.0).validate(4)
        ReductionParams(3.0).validate(4)

    def test_epsilon(self):
        assert ReductionParams(4.0).epsilon(4, 3) == pytest.approx(12 * 2.0 ** (-2))


class TestSmallTraces:
    def test_length_zero(self):
        n = 2
        bp = BranchingProgram(n, 0, (1,), (), {(0, 0): AffineSubspace.full(n)})
        red = reduce_to_affine(bp, ReductionParams(2.0))
        assert red.program.layer_sizes == (1,)
        assert red.labels.get(0, 0) == AffineSubspace.full(n)
        assert red.report.all_ok
        assert all(c.measured == 0.0 for c in red.report.accuracy_checks)

    def test_recorded_subspaces_become_labels(self):
        n = 2
        bp = record_first_sample_program(n)
        red = reduce_to_affine(bp, ReductionParams(2.0))
        rep = red.report
        assert rep.all_ok
        assert all(c.measured == pytest.approx(0.0, abs=1e-12)
                   for c in rep.accuracy_checks)
        # each consistent (a, b) edge lands on a vertex labeled by exactly
        # the recorded constraint
        row = red.program.transitions[0][0]
        for a_bits in range(1 << n):
            for b in (0, 1):
                w = intersect_hyperplane(AffineSubspace.full(n), BitVector(n, a_bits), b)
                if w.is_empty:
                    continue
                target = row[(a_bits << 1) | b]
                assert red.labels.get(1, target) == w
        assert rep.output_dim_distribution == {1: pytest.approx(0.75),
                                               2: pytest.approx(0.25)}

    def test_vacuous_epsilon_at_minimum_r(self):
        n = 2
        bp = record_first_sample_program(n)
        red = reduce_to_affine(bp, ReductionParams(n / 2))
        rep = red.report
        assert rep.epsilon >= 2.0
        assert all(not c.binding for c in rep.accuracy_checks)
        assert rep.all_ok


class TestRandomPrograms:
    @pytest.mark.parametrize("seed", [0, 1])
    def test_full_verification(self, seed):
        rng = np.random.default_rng(seed)
        for _ in range(6):
            n = int(rng.integers(2, 5))
            m = int(rng.integers(1, 4))
            width = int(rng.integers(2, 9))
            bp = random_program(n, m, width, rng)
            for r in (float(n), n / 2 + 1.0):
                red = reduce_to_affine(bp, ReductionParams(r))
                rep = red.report
                assert rep.all_ok, rep.to_dict()
                assert validate_affine(red.program, red.labels).ok
                # re-verification from scratch reproduces the report
                again = verify_reduction(bp, red, ReductionParams(r))
                assert again.to_dict() == rep.to_dict()

    def test_deterministic(self):
        rng = np.random.default_rng(3)
        bp = random_program(3, 2, 5, rng)
        red1 = reduce_to_affine(bp, ReductionParams(2.5))
        red2 = reduce_to_affine(bp, ReductionParams(2.5))
        assert to_json_dict(red1.program, red1.labels, red1.gamma) == \
            to_json_dict(red2.program, red2.labels, red2.gamma)

    def test_width_expansion_bookkeeping(self):
        rng = np.random.default_rng(4)
        bp = random_program(3, 2, 4, rng)
        red = reduce_to_affine(bp, ReductionParams(3.0))
        for j in range(bp.m):
            assert red.program.layer_sizes[j + 1] == sum(
                c + 1 for c in red.group_counts[j])


class TestFaultInjection:
    def test_broken_functionality_detected(self):
        rng = np.random.default_rng(5)
        bp = random_program(2, 2, 3, rng)
        red = reduce_to_affine(bp, ReductionParams(2.0))
        # find two layer-1 vertices that simulate different originals and
        # reroute one edge between them
        gamma1 = red.gamma[1]
        by_orig = {}
        for idx, orig in enumerate(gamma1):
            by_orig.setdefault(orig, idx)
        if len(by_orig) < 2:
            pytest.skip("degenerate random program")
        a_idx, b_idx = sorted(by_orig.values())[:2]
        row = list(red.program.transitions[0][0])
        row[0] = b_idx if row[0] == a_idx else a_idx
        broken_transitions = (tuple([tuple(row)]),) + red.program.transitions[1:]
        broken = BranchingProgram(red.program.n, red.program.m,
                                  red.program.layer_sizes, broken_transitions,
                                  red.program.leaf_labels)
        from dataclasses import replace
        bad = replace(red, program=broken)
        rep = verify_reduction(bp, bad, ReductionParams(2.0))
        assert not rep.gamma_ok

    def test_early_leaves_rejected(self):
        n = 2
        deg = 1 << (n + 1)
        bp = BranchingProgram(n, 2, (1, 1, 1), ((None,), ((0,) * deg,)),
                              {(0, 0): AffineSubspace.full(n),
                               (2, 0): AffineSubspace.full(n)})
        with pytest.raises(ValueError):
            reduce_to_affine(bp, ReductionParams(2.0))


class TestInductiveTracking:
    def test_bounds_hold_with_margin_recorded(self):
        rng = np.random.default_rng(6)
        bp = random_program(3, 3, 5, rng)
        red = reduce_to_affine(bp, ReductionParams(3.0))
        for t, check in enumerate(red.report.inductive_checks):
            assert check.ok
            assert check.bound == pytest.approx(
                min(2 * t * 2.0 ** (-(3.0 - 1.5)), 2.0))

    def test_report_serializes(self):
        rng = np.random.default_rng(7)
        bp = random_program(2, 1, 3, rng)
        red = reduce_to_affine(bp, ReductionParams(2.0))
        doc = json.loads(json.dumps(red.report.to_dict()))
        assert doc["all_ok"] is True
