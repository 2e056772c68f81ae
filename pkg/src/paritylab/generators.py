"""Seeded random instances: subspaces, mixtures, programs, and small
families of hand-built affine programs used across the test suites."""

from __future__ import annotations

import numpy as np

from .bp import AffineLabels, BranchingProgram
from .distributions import SubspaceMixture
from .gf2 import AffineSubspace, BitVector, VectorSubspace, intersect_hyperplane
from .learners import Learner, learner_state_layers


def random_subspace(n: int, rng: np.random.Generator,
                    dim: int | None = None) -> AffineSubspace:
    if dim is None:
        dim = int(rng.integers(0, n + 1))
    rows: list[int] = []
    space = VectorSubspace.from_rows(n, rows)
    while space.dim < dim:
        rows.append(int(rng.integers(1, 1 << n)))
        space = VectorSubspace.from_rows(n, rows)
    offset = BitVector(n, int(rng.integers(0, 1 << n)))
    return AffineSubspace.from_parts(offset, space)


def random_mixture(n: int, rng: np.random.Generator,
                   max_members: int = 8) -> SubspaceMixture:
    count = int(rng.integers(1, max_members + 1))
    members: dict[AffineSubspace, float] = {}
    for _ in range(20 * count):  # small n may not have `count` distinct subspaces
        members.setdefault(random_subspace(n, rng), 0.0)
        if len(members) >= count:
            break
    weights = rng.random(len(members)) + 0.05
    weights /= weights.sum()
    return SubspaceMixture(n, tuple((w, float(p)) for w, p in zip(members, weights)))


def _full_heavy_mixture(n: int, threshold: float,
                        rng: np.random.Generator) -> SubspaceMixture:
    # full-space dominated: the non-full members' total weight stays below
    # the threshold, so no hyperplane can accumulate more
    delta = threshold * (0.4 + 0.5 * float(rng.random()))
    extras = int(rng.integers(1, 5))
    pool: dict[AffineSubspace, float] = {}
    for _ in range(extras):
        w = random_subspace(n, rng)
        if w != AffineSubspace.full(n):
            pool[w] = pool.get(w, 0.0) + delta / extras
    pairs = [(AffineSubspace.full(n), 1.0 - sum(pool.values()))]
    pairs.extend(pool.items())
    return SubspaceMixture.from_pairs(n, pairs)


def _hyperplane_family_mixture(n: int, threshold: float,
                               rng: np.random.Generator) -> SubspaceMixture | None:
    # near-even weights over many hyperplanes, each lying inside exactly
    # one constraint, so per-hyperplane mass ~ 1/count
    count = min(int(np.ceil(1.5 / threshold)), 2 * (2 ** n - 1))
    if 1.0 / count > threshold:
        return None
    chosen: dict[AffineSubspace, float] = {}
    while len(chosen) < count:
        a = int(rng.integers(1, 1 << n))
        b = int(rng.integers(0, 2))
        chosen.setdefault(
            intersect_hyperplane(AffineSubspace.full(n), BitVector(n, a), b), 0.0)
    weights = 1.0 + 0.1 * rng.random(count)
    weights /= weights.sum()
    if weights.max() > threshold:
        weights = np.full(count, 1.0 / count)
    return SubspaceMixture(n, tuple((w, float(p)) for w, p in zip(chosen, weights)))


def _rejection_mixture(n: int, threshold: float,
                       rng: np.random.Generator) -> SubspaceMixture | None:
    from .distributions import hyperplane_mass

    for _ in range(200):
        count = int(rng.integers(2, 9))
        members: dict[AffineSubspace, float] = {}
        while len(members) < count:
            dim = int(rng.integers(max(0, n - 2), n + 1))
            members.setdefault(random_subspace(n, rng, dim), 0.0)
        weights = rng.random(count) + 0.05
        weights /= weights.sum()
        mix = SubspaceMixture(n, tuple((w, float(p)) for w, p in zip(members, weights)))
        mass = hyperplane_mass(mix)
        if not mass or max(mass.values()) <= threshold:
            return mix
    return None


def random_hypothesis_mixture(n: int, r: float,
                              rng: np.random.Generator) -> SubspaceMixture:
    """A mixture guaranteed to satisfy the flatness hypothesis: no
    hyperplane holds the random subspace with probability above 2^{-r}."""
    threshold = 2.0 ** (-r)
    style = int(rng.integers(0, 3))
    mix = None
    if style == 1:
        mix = _hyperplane_family_mixture(n, threshold, rng)
    elif style == 2:
        mix = _rejection_mixture(n, threshold, rng)
    return mix if mix is not None else _full_heavy_mixture(n, threshold, rng)


def random_program(n: int, m: int, width: int, rng: np.random.Generator,
                   allow_empty_labels: bool = False) -> BranchingProgram:
    """Random layered program with all leaves in the last layer."""
    sizes = [1] + [int(rng.integers(1, width + 1)) for _ in range(m)]
    degree = 1 << (n + 1)
    transitions = tuple(
        tuple(tuple(int(t) for t in rng.integers(0, sizes[j + 1], degree))
              for _ in range(sizes[j]))
        for j in range(m)
    )
    leaf_labels = {}
    for v in range(sizes[m]):
        if allow_empty_labels and rng.random() < 0.1:
            leaf_labels[(m, v)] = AffineSubspace.empty(n)
        else:
            leaf_labels[(m, v)] = random_subspace(n, rng)
    return BranchingProgram(n, m, tuple(sizes), transitions, leaf_labels)


def _constraint_recorder_step(w: AffineSubspace, a_bits: int, b: int,
                              n: int) -> AffineSubspace:
    nxt = intersect_hyperplane(w, BitVector(n, a_bits), b)
    return w if nxt.is_empty else nxt


def greedy_recorder_program(n: int, m: int, k: int) -> tuple[BranchingProgram, AffineLabels]:
    """Affine program that intersects every consistent constraint into its
    label, stopping (leaf) once the dimension hits k."""
    full = AffineSubspace.full(n)
    layers: list[list[AffineSubspace]] = [[full]]
    transitions = []
    for t in range(m):
        index: dict[AffineSubspace, int] = {}
        nxt: list[AffineSubspace] = []
        rows = []
        for w in layers[t]:
            if w.dim <= k:
                rows.append(None)
                continue
            row = []
            for a_bits in range(1 << n):
                for b in (0, 1):
                    target = _constraint_recorder_step(w, a_bits, b, n)
                    slot = index.get(target)
                    if slot is None:
                        slot = len(nxt)
                        index[target] = slot
                        nxt.append(target)
                    row.append(slot)
            rows.append(tuple(row))
        if not nxt:
            nxt = [layers[t][0]]  # keep layers non-empty once everyone is a leaf
        transitions.append(tuple(rows))
        layers.append(nxt)
    leaf_labels = {}
    for t in range(m):
        for v, w in enumerate(layers[t]):
            if transitions[t][v] is None:
                leaf_labels[(t, v)] = w
    for v, w in enumerate(layers[m]):
        leaf_labels[(m, v)] = w
    bp = BranchingProgram(n, m, tuple(len(l) for l in layers), tuple(transitions), leaf_labels)
    labels = AffineLabels(tuple(tuple(layer) for layer in layers))
    return bp, labels


def selective_recorder_program(n: int, m: int,
                               trigger: int) -> tuple[BranchingProgram, AffineLabels]:
    """Affine program that records the constraint only when a equals the
    trigger vector; everything else passes through."""
    full = AffineSubspace.full(n)
    layers: list[list[AffineSubspace]] = [[full]]
    transitions = []
    for t in range(m):
        index: dict[AffineSubspace, int] = {}
        nxt: list[AffineSubspace] = []
        rows = []
        for w in layers[t]:
            row = []
            for a_bits in range(1 << n):
                for b in (0, 1):
                    if a_bits == trigger:
                        target = _constraint_recorder_step(w, a_bits, b, n)
                    else:
                        target = w
                    slot = index.get(target)
                    if slot is None:
                        slot = len(nxt)
                        index[target] = slot
                        nxt.append(target)
                    row.append(slot)
            rows.append(tuple(row))
        transitions.append(tuple(rows))
        layers.append(nxt)
    leaf_labels = {(m, v): w for v, w in enumerate(layers[m])}
    bp = BranchingProgram(n, m, tuple(len(l) for l in layers), tuple(transitions), leaf_labels)
    labels = AffineLabels(tuple(tuple(layer) for layer in layers))
    return bp, labels


def learner_program_with_labels(learner: Learner,
                                m: int) -> tuple[BranchingProgram, AffineLabels]:
    """Unrolled learner whose affine labels are its per-state outputs.

    Sound for learners whose output subspace only ever shrinks by
    recorded constraints (the row-reduction learners qualify).
    """
    layers, transitions = learner_state_layers(learner, m)
    label_layers = tuple(
        tuple(learner.output(state) for state in layer) for layer in layers)
    leaf_labels = {(m, v): lab for v, lab in enumerate(label_layers[m])}
    bp = BranchingProgram(learner.n, m, tuple(len(l) for l in layers),
                          tuple(transitions), leaf_labels)
    return bp, AffineLabels(label_layers)
