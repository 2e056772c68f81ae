"""Reach-probability bounds for affine programs and the exponent budget
of the width-versus-samples tradeoff."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .bp import AffineLabels, BranchingProgram, Sample, forward_tables, validate_affine
from .gf2 import BitVector, orthogonal_space

SLACK = 1e-12


def reach_probability_bound(n: int, m: int, k: int) -> float:
    """m^{n-k} * 2^{sum_{j=0}^{n-k-1} (n - 2k - j)}.

    Caps the probability that a computation-path of an affine program
    whose labels all have dimension >= k reaches a dimension-k vertex.
    """
    if k >= n:
        raise ValueError(f"k must be below n, got k={k}, n={n}")
    if m < 1:
        raise ValueError(f"length must be positive, got {m}")
    t = n - k
    exponent = t * (n - 2 * k) - t * (t - 1) // 2
    return math.ldexp(float(m ** t), exponent)


@dataclass(frozen=True)
class ReachBoundReport:
    vertex: tuple[int, int]
    k: int
    exact: float
    bound: float
    ok: bool
    precondition_ok: bool
    affine_ok: bool

    def to_dict(self) -> dict:
        return {
            "vertex": list(self.vertex), "k": self.k,
            "exact": self.exact, "bound": self.bound,
            "margin": self.bound - self.exact, "ok": self.ok,
            "precondition_ok": self.precondition_ok, "affine_ok": self.affine_ok,
        }


def trim_to_min_dimension(bp: BranchingProgram, labels: AffineLabels,
                          k: int) -> tuple[BranchingProgram, AffineLabels]:
    """Make every dimension-k vertex a leaf and drop vertices below k.

    Since label dimension falls by at most one per step and edges into a
    lower-dimension vertex from a retained one can only carry an empty
    edge subspace (never traversed on consistent streams), rerouting those
    edges to the first retained vertex keeps the program sound and leaves
    every reach probability unchanged.
    """
    keep: list[list[int]] = [[] for _ in range(bp.m + 1)]
    index: dict[tuple[int, int], int] = {}
    for t in range(bp.m + 1):
        for v in range(bp.layer_sizes[t]):
            if labels.get(t, v).dim >= k:
                index[(t, v)] = len(keep[t])
                keep[t].append(v)
    if not all(keep):
        raise ValueError(f"some layer has no vertex of dimension >= {k}")
    transitions = []
    for t in range(bp.m):
        layer = []
        for v in keep[t]:
            row = bp.transitions[t][v]
            if row is None or labels.get(t, v).dim == k:
                layer.append(None)
            else:
                layer.append(tuple(index.get((t + 1, tgt), 0) for tgt in row))
        transitions.append(tuple(layer))
    new_sizes = tuple(len(keep[t]) for t in range(bp.m + 1))
    new_labels = AffineLabels(tuple(
        tuple(labels.get(t, v) for v in keep[t]) for t in range(bp.m + 1)))
    leaf_labels = {}
    for t in range(bp.m + 1):
        for i, v in enumerate(keep[t]):
            if t == bp.m or transitions[t][i] is None:
                leaf_labels[(t, i)] = labels.get(t, v)
    trimmed = BranchingProgram(bp.n, bp.m, new_sizes, tuple(transitions), leaf_labels)
    return trimmed, new_labels


def verify_reach_bound(bp: BranchingProgram, labels: AffineLabels,
                       vertex: tuple[int, int], trim: bool = False) -> ReachBoundReport:
    """Exact reach probability of a dimension-k vertex versus the bound.

    Requires every vertex label to have dimension at least k; with
    trim=True the program is first cut down to that regime.
    """
    t_v, v_v = vertex
    k = labels.get(t_v, v_v).dim
    if trim:
        bp, labels = trim_to_min_dimension(bp, labels, k)
    affine_ok = validate_affine(bp, labels).ok
    precondition_ok = all(
        labels.get(t, v).dim >= k
        for t in range(bp.m + 1) for v in range(bp.layer_sizes[t]))
    if not (affine_ok and precondition_ok):
        return ReachBoundReport(vertex, k, float("nan"), float("nan"),
                                ok=False, precondition_ok=precondition_ok,
                                affine_ok=affine_ok)
    tables = forward_tables(bp)
    exact = float(tables[t_v][v_v].sum())
    bound = reach_probability_bound(bp.n, bp.m, k) if k < bp.n else 1.0
    return ReachBoundReport(vertex, k, exact, bound,
                            ok=exact <= bound + SLACK,
                            precondition_ok=True, affine_ok=True)


@dataclass(frozen=True)
class OrthogonalTrace:
    """Dimensions of S_i ∩ s along one computation-path, where S_i is the
    space of directions constant on the i-th vertex label and s the same
    for the target vertex."""

    target: tuple[int, int]
    target_dim: int
    zs: tuple[int, ...]
    reached_target: bool

    def steps_ok(self) -> bool:
        if self.zs[0] != 0:
            return False
        return all(self.zs[i] <= self.zs[i - 1] + 1 for i in range(1, len(self.zs)))


def orthogonal_trace(bp: BranchingProgram, labels: AffineLabels,
                     target: tuple[int, int], x: BitVector,
                     samples: list[Sample]) -> OrthogonalTrace:
    """Walk the path of (x, samples) and record dim(S_i ∩ s)."""
    s_space = orthogonal_space(labels.get(*target))
    t, v = 0, 0
    zs = []
    reached = (t, v) == target
    while True:
        s_i = orthogonal_space(labels.get(t, v))
        inter_dim = s_i.dim + s_space.dim - s_i.sum_with(s_space).dim
        zs.append(inter_dim)
        if bp.is_leaf(t, v):
            break
        sample = samples[t]
        v = bp.transitions[t][v][sample.edge_index]
        t += 1
        if (t, v) == target:
            reached = True
    return OrthogonalTrace(target, labels.get(*target).dim, tuple(zs), reached)


def tradeoff_exponent(c: float, alpha: float, n: int,
                      m_exp: float | None = None,
                      d_exp: float | None = None) -> dict:
    """Exponent arithmetic for the width x reach-probability budget.

    With length 2^{m_exp * n} and width 2^{d_exp * n^2} (defaulting to
    2^{alpha n} and 2^{c n^2}), grouping strength r = (1/2 + 2 alpha) n
    and dimension threshold k = (4/5) n, multiplies the dimension-k
    vertex-count cap by the per-vertex reach bound and reports the closed
    form 4nm * 2^{n^2 (c + (3/5) alpha - 1/20 + 3/(20n))} next to it.
    Everything is carried in log2 to survive large n.
    """
    m_exp = alpha if m_exp is None else m_exp
    d_exp = c if d_exp is None else d_exp
    k = 0.8 * n
    r = (0.5 + 2 * alpha) * n
    t = n - k
    log2_m = m_exp * n
    log2_d = d_exp * n * n
    count_log2 = math.log2(4 * n) + (t * r - t * (t - 1) / 4.0) + log2_d + log2_m
    reach_log2 = t * log2_m + (t * (n - 2 * k) - t * (t - 1) / 2.0)
    product_log2 = count_log2 + reach_log2
    closed_exponent = n * n * (c + 0.6 * alpha - 0.05 + 3.0 / (20.0 * n))
    closed_log2 = math.log2(4 * n) + log2_m + closed_exponent
    alpha_max = (5.0 / 3.0) * (0.05 - c)
    out = {
        "c": c, "alpha": alpha, "n": n,
        "k": k, "r": r,
        "log2_length": log2_m, "log2_width": log2_d,
        "count_bound_log2": count_log2,
        "reach_bound_log2": reach_log2,
        "product_log2": product_log2,
        "closed_form_log2": closed_log2,
        "final_bound": 2.0 ** product_log2 if product_log2 < 1000 else float("inf"),
        "alpha_max": alpha_max,
        "condition_holds": alpha < alpha_max,
        "exponent_negative": closed_exponent < 0,
        "vacuous": product_log2 >= 0,
    }
    return out
