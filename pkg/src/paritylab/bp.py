"""Layered branching programs for parity learning.

A program of length m has m+1 layers of vertices; every non-leaf vertex
has exactly 2^{n+1} out-edges, one per labeled pair (a, b), indexed by
(a_bits << 1) | b.  Leaves carry affine-subspace output labels.  All
last-layer vertices are leaves; earlier layers may declare extra leaves.
The exact forward dynamic program tracks the joint law of (vertex, x)
with leaf weight absorbed at the leaf's own layer.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import BudgetExceeded, dp_budget
from .gf2 import (
    AffineSubspace,
    BitVector,
    contains,
    intersect_hyperplane,
    is_subset,
    parse_subspace,
)

PROB_TOL = 1e-9


class PathIncomplete(RuntimeError):
    pass


@dataclass(frozen=True, slots=True)
class Sample:
    a: BitVector
    b: int

    @property
    def edge_index(self) -> int:
        return (self.a.bits << 1) | self.b


@dataclass(frozen=True)
class BranchingProgram:
    """transitions[t][v] is a tuple of 2^{n+1} next-layer indices, or None
    for an early leaf; layer m vertices have no transition entry at all."""

    n: int
    m: int
    layer_sizes: tuple[int, ...]
    transitions: tuple[tuple[tuple[int, ...] | None, ...], ...]
    leaf_labels: dict[tuple[int, int], AffineSubspace]

    def __post_init__(self) -> None:
        if len(self.layer_sizes) != self.m + 1:
            raise ValueError("need m+1 layer sizes")
        if self.layer_sizes[0] != 1:
            raise ValueError("layer 0 must hold exactly the start vertex")
        if any(sz < 1 for sz in self.layer_sizes):
            raise ValueError("layers must be non-empty")
        if len(self.transitions) != self.m:
            raise ValueError("need transition tables for layers 0..m-1")
        degree = 1 << (self.n + 1)
        for t, layer in enumerate(self.transitions):
            if len(layer) != self.layer_sizes[t]:
                raise ValueError(f"layer {t} transition count mismatch")
            for v, row in enumerate(layer):
                if row is None:
                    continue
                if len(row) != degree:
                    raise ValueError(f"vertex ({t},{v}) needs {degree} out-edges")
                if any(not 0 <= tgt < self.layer_sizes[t + 1] for tgt in row):
                    raise ValueError(f"vertex ({t},{v}) has an out-of-range target")
        for t, v in self.iter_leaves():
            lab = self.leaf_labels.get((t, v))
            if lab is None:
                raise ValueError(f"leaf ({t},{v}) has no output label")
            if lab.n != self.n:
                raise ValueError(f"leaf ({t},{v}) label has wrong dimension")
        for (t, v) in self.leaf_labels:
            if not self.is_leaf(t, v):
                raise ValueError(f"non-leaf ({t},{v}) carries an output label")

    @property
    def width(self) -> int:
        return max(self.layer_sizes)

    @property
    def memory_bits(self) -> int:
        return max(1, int(np.ceil(np.log2(self.width)))) if self.width > 1 else 0

    def is_leaf(self, t: int, v: int) -> bool:
        return t == self.m or self.transitions[t][v] is None

    def iter_leaves(self):
        for t in range(self.m):
            for v in range(self.layer_sizes[t]):
                if self.transitions[t][v] is None:
                    yield (t, v)
        for v in range(self.layer_sizes[self.m]):
            yield (self.m, v)

    def has_early_leaves(self) -> bool:
        return any(t < self.m for t, _ in self.iter_leaves())


@dataclass(frozen=True)
class AffineLabels:
    """An affine subspace per vertex (layer-major), not only per leaf."""

    labels: tuple[tuple[AffineSubspace, ...], ...]

    def get(self, t: int, v: int) -> AffineSubspace:
        return self.labels[t][v]


@dataclass(frozen=True)
class JointDistribution:
    """Weight per (vertex in layer t, x).  The table can be sub-normalized
    when earlier leaves absorbed part of the mass."""

    n: int
    t: int
    table: np.ndarray

    def __post_init__(self) -> None:
        tab = np.asarray(self.table, dtype=np.float64)
        if tab.ndim != 2 or tab.shape[1] != 1 << self.n:
            raise ValueError("table must be (width, 2^n)")
        if tab.min() < -PROB_TOL:
            raise ValueError(f"negative weight {tab.min()}")
        if tab.sum() > 1.0 + PROB_TOL:
            raise ValueError(f"total mass {tab.sum()} exceeds 1")
        object.__setattr__(self, "table", tab)
        tab.setflags(write=False)

    def total(self) -> float:
        return float(self.table.sum())

    def vertex_marginal(self) -> np.ndarray:
        return self.table.sum(axis=1)


def _parity_table(n: int) -> np.ndarray:
    size = 1 << n
    par = np.zeros(size, dtype=np.uint8)
    for i in range(1, size):
        par[i] = par[i >> 1] ^ (i & 1)
    return par


def check_dp_budget(bp: BranchingProgram) -> None:
    cost = bp.width * (4 ** bp.n) * max(bp.m, 1)
    if cost > dp_budget():
        raise BudgetExceeded(
            f"exact DP cost {cost} exceeds budget {dp_budget()}; "
            "set PARITYLAB_DP_BUDGET to override")


def forward_tables(bp: BranchingProgram, upto: int | None = None) -> list[np.ndarray]:
    """Exact joint weights of (vertex, x) per layer, absorbing at leaves.

    tables[t][v, x] is the probability that the computation-path occupies
    v at time t (or was absorbed there, for early leaves) jointly with the
    key being x, under uniform x and uniform sample vectors.
    """
    upto = bp.m if upto is None else upto
    if not 0 <= upto <= bp.m:
        raise ValueError(f"layer {upto} out of range")
    check_dp_budget(bp)
    size = 1 << bp.n
    xs = np.arange(size)
    par = _parity_table(bp.n)
    scale = 2.0 ** (-bp.n)
    tables = [np.zeros((bp.layer_sizes[t], size)) for t in range(upto + 1)]
    tables[0][0, :] = scale
    for t in range(upto):
        cur, nxt = tables[t], tables[t + 1]
        masks0 = [par[a & xs] == 0 for a in range(size)]
        for v in range(bp.layer_sizes[t]):
            row = bp.transitions[t][v]
            if row is None:
                continue
            wx = cur[v]
            if not wx.any():
                continue
            for a in range(size):
                w0 = np.where(masks0[a], wx, 0.0)
                nxt[row[a << 1]] += w0 * scale
                nxt[row[(a << 1) | 1]] += (wx - w0) * scale
    return tables


def reach_distribution(bp: BranchingProgram, t: int) -> JointDistribution:
    tables = forward_tables(bp, upto=t)
    return JointDistribution(bp.n, t, tables[t])


def _membership_mask(w: AffineSubspace, n: int) -> np.ndarray:
    mask = np.zeros(1 << n, dtype=bool)
    if not w.is_empty:
        mask[list(w.enumerate())] = True
    return mask


def success_probability(bp: BranchingProgram) -> float:
    """Pr[x lands in the output label], absorbed at each leaf's layer."""
    tables = forward_tables(bp)
    total = 0.0
    for t, v in bp.iter_leaves():
        mask = _membership_mask(bp.leaf_labels[(t, v)], bp.n)
        total += float(tables[t][v, mask].sum())
    return total


def output_dimension_distribution(bp: BranchingProgram) -> dict[int, float]:
    """Reach probability per output-label dimension (-1 buckets Empty)."""
    tables = forward_tables(bp)
    out: dict[int, float] = {}
    for t, v in bp.iter_leaves():
        lab = bp.leaf_labels[(t, v)]
        key = -1 if lab.is_empty else lab.dim
        out[key] = out.get(key, 0.0) + float(tables[t][v].sum())
    return out


def run_path(bp: BranchingProgram, samples: list[Sample]) -> tuple[tuple[int, int], AffineSubspace]:
    t, v = 0, 0
    i = 0
    while not bp.is_leaf(t, v):
        if i >= len(samples):
            raise PathIncomplete(f"ran out of samples at layer {t}")
        s = samples[i]
        if s.a.n != bp.n:
            raise ValueError(f"sample dimension {s.a.n} != {bp.n}")
        v = bp.transitions[t][v][s.edge_index]
        t += 1
        i += 1
    return (t, v), bp.leaf_labels[(t, v)]


@dataclass(frozen=True)
class AffineValidation:
    ok: bool
    violations: list[tuple]
    notes: list[str]


def validate_affine(bp: BranchingProgram, labels: AffineLabels) -> AffineValidation:
    """Check the start label and the per-edge inclusion
    label(u) ∩ {x : a.x = b} ⊆ label(v)."""
    violations: list[tuple] = []
    notes: list[str] = []
    if labels.get(0, 0) != AffineSubspace.full(bp.n):
        violations.append(("start", 0, 0))
    for t in range(bp.m + 1):
        for v in range(bp.layer_sizes[t]):
            if labels.get(t, v).is_empty:
                notes.append(f"vertex ({t},{v}) is labeled Empty")
    for t in range(bp.m):
        for v in range(bp.layer_sizes[t]):
            row = bp.transitions[t][v]
            if row is None:
                continue
            lab = labels.get(t, v)
            for a_bits in range(1 << bp.n):
                a = BitVector(bp.n, a_bits)
                for b in (0, 1):
                    edge_space = intersect_hyperplane(lab, a, b)
                    if not is_subset(edge_space, labels.get(t + 1, row[(a_bits << 1) | b])):
                        violations.append(("edge", t, v, a_bits, b))
    return AffineValidation(not violations, violations, notes)


def layer_accuracy(bp: BranchingProgram, labels: AffineLabels, t: int) -> float:
    """E over the layer-t vertex of the l1 distance between the
    conditional key law and the uniform law on the vertex label."""
    if bp.has_early_leaves():
        raise ValueError("layer accuracy is defined only when all leaves "
                         "are in the last layer; pad early leaves first")
    dist = reach_distribution(bp, t)
    total = 0.0
    for v in range(bp.layer_sizes[t]):
        row = dist.table[v]
        pv = row.sum()
        if pv <= 0.0:
            continue
        lab = labels.get(t, v)
        uni = np.zeros(1 << bp.n)
        uni[list(lab.enumerate())] = 2.0 ** (-lab.dim)
        total += float(np.abs(row - pv * uni).sum())
    return total


def pad_early_leaves(bp: BranchingProgram) -> BranchingProgram:
    """Convert early leaves into pass-through chains ending at layer m."""
    if not bp.has_early_leaves():
        return bp
    degree = 1 << (bp.n + 1)
    early = [(t, v) for (t, v) in bp.iter_leaves() if t < bp.m]
    sizes = list(bp.layer_sizes)
    chain_index: dict[tuple[int, int], dict[int, int]] = {}
    for (t0, v0) in early:
        chain_index[(t0, v0)] = {}
        for t in range(t0 + 1, bp.m + 1):
            chain_index[(t0, v0)][t] = sizes[t]
            sizes[t] += 1
    transitions = []
    for t in range(bp.m):
        layer: list[tuple[int, ...] | None] = []
        for v in range(bp.layer_sizes[t]):
            row = bp.transitions[t][v]
            if row is None:
                layer.append((chain_index[(t, v)][t + 1],) * degree)
            else:
                layer.append(row)
        for (t0, v0) in early:
            if t0 < t:
                layer.append((chain_index[(t0, v0)][t + 1],) * degree)
        transitions.append(tuple(layer))
    leaf_labels = {}
    for v in range(bp.layer_sizes[bp.m]):
        leaf_labels[(bp.m, v)] = bp.leaf_labels[(bp.m, v)]
    for (t0, v0) in early:
        leaf_labels[(bp.m, chain_index[(t0, v0)][bp.m])] = bp.leaf_labels[(t0, v0)]
    return BranchingProgram(bp.n, bp.m, tuple(sizes), tuple(transitions), leaf_labels)


def monte_carlo_success(bp: BranchingProgram, trials: int, rng: np.random.Generator) -> float:
    size = 1 << bp.n
    hits = 0
    for _ in range(trials):
        x = int(rng.integers(0, size))
        t, v = 0, 0
        while not bp.is_leaf(t, v):
            a = int(rng.integers(0, size))
            b = bin(a & x).count("1") & 1
            v = bp.transitions[t][v][(a << 1) | b]
            t += 1
        if contains(bp.leaf_labels[(t, v)], BitVector(bp.n, x)):
            hits += 1
    return hits / trials


def to_json_dict(bp: BranchingProgram,
                 labels: AffineLabels | None = None,
                 gamma: tuple[tuple[int, ...], ...] | None = None) -> dict:
    doc: dict = {
        "n": bp.n,
        "m": bp.m,
        "layer_sizes": list(bp.layer_sizes),
        "transitions": [
            [list(row) if row is not None else None for row in layer]
            for layer in bp.transitions
        ],
        "leaf_labels": {f"{t},{v}": lab.to_text() for (t, v), lab in sorted(bp.leaf_labels.items())},
    }
    if labels is not None:
        doc["labels"] = [[w.to_text() for w in layer] for layer in labels.labels]
    if gamma is not None:
        doc["gamma"] = [list(layer) for layer in gamma]
    return doc


def from_json_dict(doc: dict) -> tuple[BranchingProgram, AffineLabels | None,
                                       tuple[tuple[int, ...], ...] | None]:
    n = int(doc["n"])
    m = int(doc["m"])
    transitions = tuple(
        tuple(tuple(row) if row is not None else None for row in layer)
        for layer in doc["transitions"]
    )
    leaf_labels = {}
    for key, text in doc["leaf_labels"].items():
        t, v = key.split(",")
        leaf_labels[(int(t), int(v))] = parse_subspace(text, n)
    bp = BranchingProgram(n, m, tuple(int(s) for s in doc["layer_sizes"]),
                          transitions, leaf_labels)
    labels = None
    if "labels" in doc:
        labels = AffineLabels(tuple(
            tuple(parse_subspace(text, n) for text in layer) for layer in doc["labels"]))
    gamma = None
    if "gamma" in doc:
        gamma = tuple(tuple(int(g) for g in layer) for layer in doc["gamma"])
    return bp, labels, gamma
