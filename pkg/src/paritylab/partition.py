"""Grouping mixtures of affine subspaces under containing representatives.

The core recursion finds, for a mixture W, an affine subspace s such that
W lands inside s with non-negligible probability and the conditional
mixture is near-uniform on s.  Iterating it on the residual mixture yields
a partial grouping map sigma with small undefined mass.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .distributions import (
    SubspaceMixture,
    hyperplane_mass,
    l1_distance,
    mixture_distribution,
    uniform_over,
)
from .gf2 import (
    AffineSubspace,
    BitVector,
    VectorSubspace,
    is_subset,
    lowest_set_bit,
    parity,
)


def exponent_sum(r: float, terms: int) -> float:
    """sum_{i=0}^{terms-1} (r - i/2)."""
    return terms * r - terms * (terms - 1) / 4.0


def constant_value_on(w: AffineSubspace, a_bits: int) -> int | None:
    """The bit b with a.x = b on all of w, or None if a is non-constant."""
    if any(parity(a_bits & row) for row in w.direction.rows):
        return None
    return parity(a_bits & w.offset.bits)


def hyperplane_concentration(mix: SubspaceMixture) -> tuple[BitVector, int, float]:
    """The (a, b) maximizing Pr[W ⊆ {x : a.x = b}] over a != 0.

    Ties break to the lexicographically smallest pair: a compared as a
    packed integer, then b = 0 before b = 1.
    """
    table = hyperplane_mass(mix)
    if not table:
        return BitVector(mix.n, 1), 0, 0.0
    best = max(table.items(), key=lambda kv: (kv[1], -kv[0][0], -kv[0][1]))
    (a, b), p = best
    return BitVector(mix.n, a), b, p


def _drop_bit(v: int, pos: int) -> int:
    return (v & ((1 << pos) - 1)) | ((v >> (pos + 1)) << pos)


def _insert_zero_bit(v: int, pos: int) -> int:
    return (v & ((1 << pos) - 1)) | ((v >> pos) << (pos + 1))


def project_out(w: AffineSubspace, pivot: int) -> AffineSubspace:
    """Image of w under dropping one coordinate.

    Only valid when the dropped coordinate is determined by the others on
    w (w inside a hyperplane whose pivot it is); then the map is a
    bijection and dimensions are preserved.
    """
    rows = [_drop_bit(r, pivot) for r in w.direction.rows]
    offset = BitVector(w.n - 1, _drop_bit(w.offset.bits, pivot))
    return AffineSubspace.from_parts(offset, VectorSubspace.from_rows(w.n - 1, rows))


def lift_back(w: AffineSubspace, a_bits: int, b: int, pivot: int) -> AffineSubspace:
    """Inverse of project_out onto the hyperplane {x : a.x = b}.

    Reinserts the pivot coordinate, set so every lifted point satisfies
    the hyperplane constraint.
    """
    n = w.n + 1
    rows = []
    for r in w.direction.rows:
        v = _insert_zero_bit(r, pivot)
        v |= parity(a_bits & v) << pivot
        rows.append(v)
    off = _insert_zero_bit(w.offset.bits, pivot)
    off |= (b ^ parity(a_bits & off)) << pivot
    return AffineSubspace.from_parts(BitVector(n, off), VectorSubspace.from_rows(n, rows))


def _find_rep(mix: SubspaceMixture, r: float) -> AffineSubspace:
    n = mix.n
    if n == 0:
        return AffineSubspace.full(0)
    a, b, p = hyperplane_concentration(mix)
    if p <= 2.0 ** (-r):
        return AffineSubspace.full(n)
    pivot = lowest_set_bit(a.bits)
    inside, _ = mix.restrict(lambda w: constant_value_on(w, a.bits) == b)
    reduced = SubspaceMixture(
        n - 1, tuple((project_out(w, pivot), q) for w, q in inside.support))
    return lift_back(_find_rep(reduced, r - 0.5), a.bits, b, pivot)


def find_representative_subspace(
        mix: SubspaceMixture, r: float) -> tuple[AffineSubspace, SubspaceMixture, float]:
    """An affine subspace s capturing a non-negligible, near-uniform slice of W.

    Returns (s, W | W ⊆ s, Pr[W ⊆ s]).  The recursion restricts to the
    most concentrated hyperplane while one exceeds 2^{-r}, recursing with
    (n-1, r-1/2) after eliminating the pivot coordinate, and stops at the
    current ambient space otherwise.  The returned mass is at least
    2^{-sum_{i=0}^{n-dim(s)-1}(r - i/2)} and the conditional mixture is
    within 2^{-(r - n/2)} of uniform on s.
    """
    if r < mix.n / 2:
        raise ValueError(f"r must be at least n/2 = {mix.n / 2}, got {r}")
    s = _find_rep(mix, r)
    conditioned, mass = mix.restrict(lambda w: is_subset(w, s))
    return s, conditioned, mass


@dataclass(frozen=True)
class PartitionGroup:
    representative: AffineSubspace
    members: tuple[AffineSubspace, ...]
    probabilities: tuple[float, ...]  # pre-conditioning masses, one per member

    @property
    def mass(self) -> float:
        return sum(self.probabilities)

    def conditional(self) -> SubspaceMixture:
        m = self.mass
        return SubspaceMixture(self.representative.n,
                               tuple((w, p / m) for w, p in zip(self.members, self.probabilities)))

    def l1_to_uniform(self) -> float:
        return l1_distance(mixture_distribution(self.conditional()),
                           uniform_over(self.representative))


@dataclass(frozen=True)
class SubspacePartition:
    """Round-ordered grouping of a mixture's support under representatives.

    Membership in a group means sigma(w) = representative; subspaces in
    ``residual`` (and any subspace contained in no representative) are the
    ones on which sigma stays undefined.
    """

    n: int
    r: float
    groups: tuple[PartitionGroup, ...]
    residual: tuple[tuple[AffineSubspace, float], ...]

    @property
    def residual_mass(self) -> float:
        return sum(p for _, p in self.residual)

    def assign(self, w: AffineSubspace) -> AffineSubspace | None:
        """sigma(w): the earliest representative containing w, else None.

        Defined for any subspace (also ones outside the original support);
        zero-probability subspaces inside some representative are assigned
        on purpose, which is harmless for every partition property.
        """
        for g in self.groups:
            if is_subset(w, g.representative):
                return g.representative
        return None

    def representatives_with_dim_at_least(self, k: int) -> int:
        return sum(1 for g in self.groups if g.representative.dim >= k)


def build_partition(mix: SubspaceMixture, r: float) -> SubspacePartition:
    """Iterate find_representative_subspace until the unassigned mass is
    at most 2^{-2n}."""
    n = mix.n
    if r < n / 2:
        raise ValueError(f"r must be at least n/2 = {n / 2}, got {r}")
    target = 2.0 ** (-2 * n)
    round_cap = math.ceil(4 * n * 2.0 ** exponent_sum(r, n)) + 1
    remaining = list(mix.support)
    groups: list[PartitionGroup] = []
    while sum(p for _, p in remaining) > target:
        if len(groups) >= round_cap:
            raise RuntimeError(f"partition failed to converge within {round_cap} rounds")
        current = SubspaceMixture.from_pairs(n, remaining)
        s, _, _ = find_representative_subspace(current, r)
        taken = [(w, p) for w, p in remaining if is_subset(w, s)]
        remaining = [(w, p) for w, p in remaining if not is_subset(w, s)]
        groups.append(PartitionGroup(s, tuple(w for w, _ in taken), tuple(p for _, p in taken)))
    return SubspacePartition(n, r, tuple(groups), tuple(remaining))


def group_count_bound(n: int, r: float, k: int) -> float:
    """Cap on the number of representatives of dimension at least k."""
    return 4 * n * 2.0 ** exponent_sum(r, n - k)


def partition_report(partition: SubspacePartition) -> dict:
    """JSON-ready summary with per-group masses and l1 distances."""
    return {
        "n": partition.n,
        "r": partition.r,
        "residual_mass": partition.residual_mass,
        "groups": [
            {
                "representative": g.representative.to_text(),
                "dimension": g.representative.dim,
                "members": [w.to_text() for w in g.members],
                "mass": g.mass,
                "l1_to_uniform": g.l1_to_uniform(),
            }
            for g in partition.groups
        ],
    }
