"""Layer-by-layer simulation of a branching program by an accurate affine one.

Each original vertex v is split into one vertex per representative of a
subspace grouping built from the incoming edge subspaces (weighted by the
idealized process that pairs each vertex with a uniform point of its
label), plus a catch-all vertex labeled with the full space.  Incoming
edges are rewired to the group of their edge subspace; outgoing edges are
duplicated.  The simulation map, the idealized per-layer marginals, and
every measured bound are retained for independent verification.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .bp import (
    AffineLabels,
    BranchingProgram,
    forward_tables,
    layer_accuracy,
    output_dimension_distribution,
    success_probability,
    validate_affine,
)
from .distributions import SubspaceMixture
from .gf2 import AffineSubspace, BitVector, intersect_hyperplane
from .partition import SubspacePartition, build_partition, exponent_sum

SLACK = 1e-12


@dataclass(frozen=True)
class ReductionParams:
    """Grouping strength r, with n/2 <= r <= n enforced at use."""

    r: float

    def epsilon(self, n: int, m: int) -> float:
        return 4 * m * 2.0 ** (-(self.r - n / 2))

    def validate(self, n: int) -> None:
        if not n / 2 <= self.r <= n:
            raise ValueError(f"r must lie in [n/2, n] = [{n / 2}, {n}], got {self.r}")


@dataclass(frozen=True)
class BoundCheck:
    name: str
    measured: float
    bound: float
    binding: bool     # a bound above the trivial ceiling is vacuous
    ok: bool

    def margin(self) -> float:
        return self.bound - self.measured


@dataclass(frozen=True)
class ReductionReport:
    n: int
    m: int
    r: float
    beta: float
    epsilon: float
    affine_ok: bool
    gamma_ok: bool
    accuracy_checks: tuple[BoundCheck, ...]
    inductive_checks: tuple[BoundCheck, ...]
    dim_count_checks: tuple[BoundCheck, ...]
    output_dim_checks: tuple[BoundCheck, ...]
    output_dim_distribution: dict[int, float]
    dim_vertex_counts: dict[int, int]
    width_expansion_ok: bool

    @property
    def all_ok(self) -> bool:
        checks = (self.accuracy_checks + self.inductive_checks
                  + self.dim_count_checks + self.output_dim_checks)
        return (self.affine_ok and self.gamma_ok and self.width_expansion_ok
                and all(c.ok for c in checks))

    def to_dict(self) -> dict:
        def dump(checks):
            return [
                {"name": c.name, "measured": c.measured, "bound": c.bound,
                 "binding": c.binding, "ok": c.ok}
                for c in checks
            ]
        return {
            "n": self.n, "m": self.m, "r": self.r,
            "beta": self.beta, "epsilon": self.epsilon,
            "affine_ok": self.affine_ok, "gamma_ok": self.gamma_ok,
            "width_expansion_ok": self.width_expansion_ok,
            "accuracy": dump(self.accuracy_checks),
            "inductive": dump(self.inductive_checks),
            "dimension_counts": dump(self.dim_count_checks),
            "output_dimension": dump(self.output_dim_checks),
            "output_dim_distribution": {str(k): v for k, v in sorted(self.output_dim_distribution.items())},
            "dim_vertex_counts": {str(k): v for k, v in sorted(self.dim_vertex_counts.items())},
            "all_ok": self.all_ok,
        }


@dataclass(frozen=True)
class AffineReduction:
    """The affine program plus everything needed to re-verify it."""

    program: BranchingProgram
    labels: AffineLabels
    gamma: tuple[tuple[int, ...], ...]
    ideal_marginals: tuple[tuple[float, ...], ...]
    group_counts: tuple[tuple[int, ...], ...]   # per layer, groups per original vertex
    params: ReductionParams
    report: ReductionReport | None = field(default=None, compare=False)


def reduce_to_affine(bp: BranchingProgram, params: ReductionParams) -> AffineReduction:
    """Transform bp into an accurate affine program.

    Requires every leaf of bp in the last layer.  The idealized joint law
    of (vertex, key) is propagated exactly: conditioned on a vertex, the
    idealized key is uniform on the vertex label, so only the vertex
    marginals need to be carried between layers.
    """
    n, m = bp.n, bp.m
    params.validate(n)
    if bp.has_early_leaves():
        raise ValueError("all leaves must be in the last layer; pad early leaves first")
    full = AffineSubspace.full(n)
    scale = 2.0 ** (-n)

    layer_labels: list[tuple[AffineSubspace, ...]] = [(full,)]
    gamma: list[tuple[int, ...]] = [(0,)]
    marginals: list[tuple[float, ...]] = [(1.0,)]
    group_counts: list[tuple[int, ...]] = []
    transitions: list[tuple[tuple[int, ...], ...]] = []

    for j in range(1, m + 1):
        prev_labels = layer_labels[j - 1]
        prev_gamma = gamma[j - 1]
        prev_q = marginals[j - 1]
        b_size = bp.layer_sizes[j]

        # Idealized one-step propagation: from vertex u with marginal q(u),
        # drawing a uniform and b = a.y with y uniform on label(u) puts
        # mass q(u) * 2^{-n} * Pr[a.y = b] on the edge subspace
        # label(u) ∩ {a.x = b}; consistent constraints keep probability
        # 1 (dimension preserved) or 1/2 (dimension drops).
        mass: list[dict[AffineSubspace, float]] = [dict() for _ in range(b_size)]
        edges: list[list[tuple[int, AffineSubspace]]] = []
        for u, lab_u in enumerate(prev_labels):
            row = bp.transitions[j - 1][prev_gamma[u]]
            q_u = prev_q[u]
            out: list[tuple[int, AffineSubspace]] = []
            for a_bits in range(1 << n):
                a = BitVector(n, a_bits)
                for b in (0, 1):
                    w_e = intersect_hyperplane(lab_u, a, b)
                    v_orig = row[(a_bits << 1) | b]
                    out.append((v_orig, w_e))
                    if q_u > 0.0 and not w_e.is_empty:
                        p_cond = 1.0 if w_e.dim == lab_u.dim else 0.5
                        acc = mass[v_orig]
                        acc[w_e] = acc.get(w_e, 0.0) + q_u * p_cond * scale
            edges.append(out)

        partitions: list[SubspacePartition | None] = []
        slot_of: list[dict[AffineSubspace, int]] = []
        new_labels: list[AffineSubspace] = []
        new_gamma: list[int] = []
        new_q: list[float] = []
        star_slot: list[int] = []
        counts: list[int] = []
        for v in range(b_size):
            total = sum(mass[v].values())
            if total > 0.0:
                mixture = SubspaceMixture.from_pairs(n, list(mass[v].items()))
                part = build_partition(mixture, params.r)
            else:
                part = None
            partitions.append(part)
            slots: dict[AffineSubspace, int] = {}
            if part is not None:
                for g in part.groups:
                    slots[g.representative] = len(new_labels)
                    new_labels.append(g.representative)
                    new_gamma.append(v)
                    new_q.append(g.mass * total)
            slot_of.append(slots)
            star_slot.append(len(new_labels))
            new_labels.append(full)
            new_gamma.append(v)
            star_mass = (total - sum(g.mass for g in part.groups)) if part is not None else 0.0
            new_q.append(max(star_mass, 0.0))
            counts.append(len(slots))

        rewired: list[tuple[int, ...]] = []
        for u in range(len(prev_labels)):
            row_new = []
            for (v_orig, w_e) in edges[u]:
                part = partitions[v_orig]
                target = None
                if part is not None and not w_e.is_empty:
                    rep = part.assign(w_e)
                    if rep is not None:
                        target = slot_of[v_orig][rep]
                row_new.append(star_slot[v_orig] if target is None else target)
            rewired.append(tuple(row_new))

        transitions.append(tuple(rewired))
        layer_labels.append(tuple(new_labels))
        gamma.append(tuple(new_gamma))
        marginals.append(tuple(new_q))
        group_counts.append(tuple(counts))

    sizes = tuple(len(layer) for layer in layer_labels)
    leaf_labels = {(m, v): lab for v, lab in enumerate(layer_labels[m])}
    program = BranchingProgram(n, m, sizes, tuple(transitions), leaf_labels)
    labels = AffineLabels(tuple(layer_labels))
    reduction = AffineReduction(program, labels, tuple(gamma), tuple(marginals),
                                tuple(group_counts), params)
    return replace(reduction, report=verify_reduction(bp, reduction, params))


def _ideal_joint(red: AffineReduction, t: int) -> np.ndarray:
    n = red.program.n
    table = np.zeros((red.program.layer_sizes[t], 1 << n))
    for v, q in enumerate(red.ideal_marginals[t]):
        if q <= 0.0:
            continue
        lab = red.labels.get(t, v)
        table[v, list(lab.enumerate())] = q * 2.0 ** (-lab.dim)
    return table


def verify_reduction(bp: BranchingProgram, red: AffineReduction,
                     params: ReductionParams) -> ReductionReport:
    """Recompute every reported quantity of a reduction from scratch."""
    n, m = bp.n, bp.m
    params.validate(n)
    program, labels = red.program, red.labels
    eps = params.epsilon(n, m)
    step = 2.0 ** (-(params.r - n / 2))

    affine_ok = validate_affine(program, labels).ok
    beta = success_probability(bp)

    accuracy_checks = []
    for t in range(m + 1):
        acc = layer_accuracy(program, labels, t)
        bound = min(eps, 2.0)
        accuracy_checks.append(BoundCheck(
            f"accuracy[t={t}]", acc, bound, binding=eps < 2.0,
            ok=acc <= bound + SLACK))

    tables = forward_tables(program)
    inductive_checks = []
    for t in range(m + 1):
        measured = float(np.abs(tables[t] - _ideal_joint(red, t)).sum())
        bound = min(2 * t * step, 2.0)
        inductive_checks.append(BoundCheck(
            f"inductive[t={t}]", measured, bound, binding=2 * t * step < 2.0,
            ok=measured <= bound + SLACK))

    dim_counts: dict[int, int] = {}
    for layer in labels.labels:
        for lab in layer:
            dim_counts[lab.dim] = dim_counts.get(lab.dim, 0) + 1
    dim_count_checks = []
    for k in range(n + 1):
        bound = 4 * n * 2.0 ** exponent_sum(params.r, n - k) * bp.width * m if m else float("inf")
        count = dim_counts.get(k, 0)
        dim_count_checks.append(BoundCheck(
            f"count[dim={k}]", float(count), bound, binding=True,
            ok=count <= bound + SLACK))

    out_dims = output_dimension_distribution(program)
    output_dim_checks = []
    b_dims = [lab.dim for lab in bp.leaf_labels.values() if not lab.is_empty]
    if b_dims:
        k_prime = max(b_dims)
        for k in range(k_prime + 1, n):
            lower = beta - eps - 2.0 ** (-(k - k_prime))
            measured = sum(p for d, p in out_dims.items() if 0 <= d < k)
            output_dim_checks.append(BoundCheck(
                f"output[dim<{k}]", measured, lower, binding=lower > 0.0,
                ok=measured >= lower - SLACK))

    gamma_ok = _check_gamma(bp, red)
    width_ok = all(
        program.layer_sizes[j + 1]
        == sum(c + 1 for c in red.group_counts[j])
        for j in range(m))

    return ReductionReport(
        n=n, m=m, r=params.r, beta=beta, epsilon=eps,
        affine_ok=affine_ok, gamma_ok=gamma_ok,
        accuracy_checks=tuple(accuracy_checks),
        inductive_checks=tuple(inductive_checks),
        dim_count_checks=tuple(dim_count_checks),
        output_dim_checks=tuple(output_dim_checks),
        output_dim_distribution=out_dims,
        dim_vertex_counts=dim_counts,
        width_expansion_ok=width_ok,
    )


def _check_gamma(bp: BranchingProgram, red: AffineReduction) -> bool:
    """Structure preservation (layers to layers, leaves to leaves) and
    functionality preservation (every edge of the simulation exists in
    the original with the same label)."""
    program, gamma = red.program, red.gamma
    if len(gamma) != bp.m + 1:
        return False
    for t in range(bp.m + 1):
        if len(gamma[t]) != program.layer_sizes[t]:
            return False
        for u, orig in enumerate(gamma[t]):
            if not 0 <= orig < bp.layer_sizes[t]:
                return False
            if program.is_leaf(t, u) != bp.is_leaf(t, orig):
                return False
    for t in range(bp.m):
        for u in range(program.layer_sizes[t]):
            row = program.transitions[t][u]
            if row is None:
                continue
            orig_row = bp.transitions[t][gamma[t][u]]
            for idx, target in enumerate(row):
                if orig_row[idx] != gamma[t + 1][target]:
                    return False
    return True
