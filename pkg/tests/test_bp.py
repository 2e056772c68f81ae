import itertools
import json

import numpy as np
import pytest

from paritylab.bp import (
    AffineLabels,
    BranchingProgram,
    JointDistribution,
    PathIncomplete,
    Sample,
    forward_tables,
    from_json_dict,
    layer_accuracy,
    monte_carlo_success,
    output_dimension_distribution,
    pad_early_leaves,
    reach_distribution,
    run_path,
    success_probability,
    to_json_dict,
    validate_affine,
)
from paritylab.config import BudgetExceeded
from paritylab.generators import greedy_recorder_program, selective_recorder_program
from paritylab.gf2 import AffineSubspace, BitVector, contains, intersect_hyperplane, parity

bv = BitVector.from_string


def record_first_sample_program(n, m):
    """Layer 1 keyed by the first (a, b); every leaf labeled by the
    recorded constraint (full space when a = 0); later layers pass through."""
    full = AffineSubspace.full(n)
    deg = 1 << (n + 1)
    sizes = [1] + [deg] * m
    transitions = [tuple([tuple(range(deg))])]
    for _ in range(m - 1):
        transitions.append(tuple(tuple([v] * deg) for v in range(deg)))
    labels = {}
    for idx in range(deg):
        a, b = idx >> 1, idx & 1
        w = intersect_hyperplane(full, BitVector(n, a), b) if a else full
        labels[(m, idx)] = w
    return BranchingProgram(n, m, tuple(sizes), tuple(transitions), labels)


def chain_program(n, m, label):
    deg = 1 << (n + 1)
    transitions = tuple((tuple([0] * deg),) for _ in range(m))
    return BranchingProgram(n, m, (1,) * (m + 1), transitions, {(m, 0): label})


class TestRunPath:
    def test_keyed_leaves_n1(self):
        # one-layer program with 4 leaves keyed by (a, b); for x=1 the
        # sample (1,1) lands on the leaf labeled {1}
        n = 1
        full = AffineSubspace.full(n)
        labels = {}
        for idx in range(4):
            a, b = idx >> 1, idx & 1
            labels[(1, idx)] = (intersect_hyperplane(full, BitVector(n, a), b)
                                if a else full)
        bp = BranchingProgram(n, 1, (1, 4), ((tuple(range(4)),),), labels)
        for x in (0, 1):
            for a in (0, 1):
                b = a & x
                leaf, out = run_path(bp, [Sample(BitVector(1, a), b)])
                assert contains(out, BitVector(1, x))
        leaf, out = run_path(bp, [Sample(BitVector(1, 1), 1)])
        assert list(out.enumerate()) == [1]

    def test_chain_ignores_inputs(self):
        bp = chain_program(2, 3, AffineSubspace.full(2))
        rng = np.random.default_rng(0)
        for _ in range(5):
            samples = [Sample(BitVector(2, int(rng.integers(0, 4))), int(rng.integers(0, 2)))
                       for _ in range(3)]
            assert run_path(bp, samples)[0] == (3, 0)

    def test_path_incomplete(self):
        bp = chain_program(2, 3, AffineSubspace.full(2))
        with pytest.raises(PathIncomplete):
            run_path(bp, [Sample(BitVector(2, 0), 0)])


class TestReachDistribution:
    def test_layer_zero_uniform(self):
        bp = record_first_sample_program(2, 1)
        dist = reach_distribution(bp, 0)
        assert np.allclose(dist.table, 0.25)

    def test_route_on_b_n1(self):
        # routes on b only; joint weights enumerated over (x, a)
        n = 1
        bp = BranchingProgram(n, 1, (1, 2), (((0, 1, 0, 1),),),
                              {(1, 0): AffineSubspace.full(n), (1, 1): AffineSubspace.full(n)})
        dist = reach_distribution(bp, 1)
        assert dist.table[0, 0] == pytest.approx(0.5)
        assert dist.table[0, 1] == pytest.approx(0.25)
        assert dist.table[1, 0] == pytest.approx(0.0)
        assert dist.table[1, 1] == pytest.approx(0.25)

    def test_conservation(self):
        rng = np.random.default_rng(1)
        from paritylab.generators import random_program
        for _ in range(10):
            bp = random_program(3, 3, 5, rng)
            for t in range(bp.m + 1):
                assert reach_distribution(bp, t).total() == pytest.approx(1.0)


class TestSuccess:
    def test_full_labels(self):
        bp = record_first_sample_program(3, 2)
        full_bp = BranchingProgram(
            bp.n, bp.m, bp.layer_sizes, bp.transitions,
            {k: AffineSubspace.full(3) for k in bp.leaf_labels})
        assert success_probability(full_bp) == 1.0

    def test_fixed_point_labels(self):
        n = 2
        bp = chain_program(n, 2, AffineSubspace.point(BitVector(n, 0)))
        assert success_probability(bp) == pytest.approx(2.0 ** (-n))

    def test_record_one_equation(self):
        bp = record_first_sample_program(2, 2)
        assert success_probability(bp) == 1.0
        dims = output_dimension_distribution(bp)
        assert dims == {1: pytest.approx(0.75), 2: pytest.approx(0.25)}

    def test_monte_carlo_matches_dp(self):
        bp = record_first_sample_program(2, 2)
        half_bp = BranchingProgram(
            bp.n, bp.m, bp.layer_sizes, bp.transitions,
            {k: (lab if k[1] % 2 else AffineSubspace.point(BitVector(2, 1)))
             for k, lab in bp.leaf_labels.items()})
        exact = success_probability(half_bp)
        trials = 100_000
        est = monte_carlo_success(half_bp, trials, np.random.default_rng(2))
        sigma = (exact * (1 - exact) / trials) ** 0.5
        assert abs(est - exact) <= 3 * sigma


class TestValidateAffine:
    def test_all_full_ok(self):
        bp = record_first_sample_program(2, 1)
        full = AffineSubspace.full(2)
        labels = AffineLabels(((full,), (full,) * 8))
        report = validate_affine(bp, labels)
        assert report.ok and not report.violations

    def test_violation_listed(self):
        n = 2
        bp = record_first_sample_program(n, 1)
        layer1 = [bp.leaf_labels[(1, i)] for i in range(8)]
        layer1[2] = AffineSubspace.point(BitVector(n, 3))  # breaks inclusion for edge (a=1,b=0)
        labels = AffineLabels(((AffineSubspace.full(n),), tuple(layer1)))
        report = validate_affine(bp, labels)
        assert not report.ok
        assert any(v[0] == "edge" and v[3] == 1 and v[4] == 0 for v in report.violations)

    def test_empty_label_permitted_and_flagged(self):
        n = 2
        bp = chain_program(n, 1, AffineSubspace.empty(n))
        # the program itself is legal and contributes zero success
        assert success_probability(bp) == 0.0
        labels = AffineLabels(((AffineSubspace.full(n),), (AffineSubspace.empty(n),)))
        report = validate_affine(bp, labels)
        assert any("Empty" in note for note in report.notes)
        # an Empty label on a consistently-reachable vertex does break
        # the per-edge inclusion, and the report says where
        assert not report.ok and report.violations


class TestLayerAccuracy:
    def test_start_layer(self):
        bp = record_first_sample_program(2, 1)
        labels = AffineLabels(((AffineSubspace.full(2),),
                               tuple(bp.leaf_labels[(1, i)] for i in range(8))))
        assert layer_accuracy(bp, labels, 0) == 0.0

    def test_matching_labels_zero(self):
        bp = record_first_sample_program(2, 1)
        labels = AffineLabels(((AffineSubspace.full(2),),
                               tuple(bp.leaf_labels[(1, i)] for i in range(8))))
        assert layer_accuracy(bp, labels, 1) == pytest.approx(0.0, abs=1e-12)

    def test_full_labels_after_one_equation(self):
        """Enumeration oracle at n=2: conditioned on a layer-1 vertex
        (a, b) with a != 0, x is uniform on a 2-point hyperplane, at l1
        distance 1 from uniform over the full label; the a = 0 vertex is
        exactly uniform.  Expectation = Pr[a != 0] * 1 = 3/4."""
        n = 2
        bp = record_first_sample_program(n, 1)
        full = AffineSubspace.full(n)
        labels = AffineLabels(((full,), (full,) * 8))
        got = layer_accuracy(bp, labels, 1)

        counts = {}
        for x in range(4):
            for a in range(4):
                b = parity(a & x)
                counts.setdefault((a, b), []).append(x)
        expected = 0.0
        for (a, b), xs in counts.items():
            pv = len(xs) / 16
            cond = np.zeros(4)
            for x in xs:
                cond[x] += 1 / len(xs)
            expected += pv * np.abs(cond - 0.25).sum()
        assert got == pytest.approx(expected, abs=1e-12)
        assert got == pytest.approx(0.75)

    def test_early_leaves_rejected(self):
        n = 2
        deg = 1 << (n + 1)
        bp = BranchingProgram(n, 2, (1, 1, 1),
                              ((None,), ((0,) * deg,)),
                              {(0, 0): AffineSubspace.full(n), (2, 0): AffineSubspace.full(n)})
        labels = AffineLabels(((AffineSubspace.full(n),),) * 3)
        with pytest.raises(ValueError):
            layer_accuracy(bp, labels, 1)


class TestSoundnessInvariant:
    @pytest.mark.parametrize("maker,k", [(greedy_recorder_program, 1),
                                         (greedy_recorder_program, 0)])
    def test_pathwise_containment_exhaustive(self, maker, k):
        n, m = 2, 2
        bp, labels = maker(n, m, k)
        assert validate_affine(bp, labels).ok
        for x in range(1 << n):
            for a_seq in itertools.product(range(1 << n), repeat=m):
                t, v = 0, 0
                assert contains(labels.get(t, v), BitVector(n, x))
                for a in a_seq:
                    if bp.is_leaf(t, v):
                        break
                    v = bp.transitions[t][v][(a << 1) | parity(a & x)]
                    t += 1
                    assert contains(labels.get(t, v), BitVector(n, x))

    def test_affine_success_is_one(self):
        for n, m in ((2, 2), (3, 2)):
            bp, labels = selective_recorder_program(n, m, 1)
            assert validate_affine(bp, labels).ok
            assert success_probability(bp) == 1.0


class TestPadding:
    def test_pad_preserves_success_and_reach(self):
        n = 2
        deg = 1 << (n + 1)
        # start splits to an early leaf (index 0) and a pass-through chain
        row = tuple(0 if i < deg // 2 else 1 for i in range(deg))
        bp = BranchingProgram(
            n, 2, (1, 2, 1),
            ((row,), (None, (0,) * deg)),
            {(1, 0): AffineSubspace.point(BitVector(n, 0)),
             (2, 0): AffineSubspace.full(n)})
        padded = pad_early_leaves(bp)
        assert not padded.has_early_leaves()
        assert success_probability(padded) == pytest.approx(success_probability(bp))
        assert output_dimension_distribution(padded) == pytest.approx(
            output_dimension_distribution(bp))


class TestSerialization:
    def test_round_trip(self):
        from paritylab.generators import random_program
        rng = np.random.default_rng(5)
        bp = random_program(3, 2, 4, rng)
        doc = json.loads(json.dumps(to_json_dict(bp)))
        back, labels, gamma = from_json_dict(doc)
        assert back == bp and labels is None and gamma is None

    def test_with_labels_and_gamma(self):
        bp, labels = greedy_recorder_program(2, 2, 1)
        gamma = tuple(tuple(range(sz)) for sz in bp.layer_sizes)
        doc = to_json_dict(bp, labels=labels, gamma=gamma)
        back, blabels, bgamma = from_json_dict(json.loads(json.dumps(doc)))
        assert back == bp and blabels == labels and bgamma == gamma


class TestGuards:
    def test_budget(self, monkeypatch):
        monkeypatch.setenv("PARITYLAB_DP_BUDGET", "10")
        bp = record_first_sample_program(2, 1)
        with pytest.raises(BudgetExceeded):
            forward_tables(bp)

    def test_joint_distribution_validation(self):
        with pytest.raises(ValueError):
            JointDistribution(1, 0, np.array([[0.9, 0.9]]))
        with pytest.raises(ValueError):
            JointDistribution(1, 0, np.array([[-0.2, 0.5]]))

    def test_structural_validation(self):
        full = AffineSubspace.full(1)
        with pytest.raises(ValueError):
            BranchingProgram(1, 1, (2, 1), ((None, None),), {})
        with pytest.raises(ValueError):
            BranchingProgram(1, 1, (1, 1), (((0, 0, 0),),), {(1, 0): full})
        with pytest.raises(ValueError):
            BranchingProgram(1, 1, (1, 1), (((0, 0, 0, 9),),), {(1, 0): full})
        with pytest.raises(ValueError):
            BranchingProgram(1, 1, (1, 1), (((0,) * 4,),), {})  # missing leaf label
