"""Exact distributions over {0,1}^n, mixtures of subspace-uniform laws,
Walsh-Fourier transforms, and the Fourier closeness criterion."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .gf2 import (
    AffineSubspace,
    BitVector,
    DimensionMismatch,
    EmptySubspaceError,
    orthogonal_space,
    parity,
)

MAX_TABLE_DIM = 12  # exact 2^n tables stop making sense past desk scale
PROB_TOL = 1e-9


def _check_table_dim(n: int) -> None:
    if not 0 <= n <= MAX_TABLE_DIM:
        raise ValueError(f"exact tables support 0 <= n <= {MAX_TABLE_DIM}, got {n}")


@dataclass(frozen=True)
class ExactDistribution:
    """A probability table over {0,1}^n indexed by the packed point value."""

    n: int
    weights: np.ndarray

    def __post_init__(self) -> None:
        _check_table_dim(self.n)
        w = np.asarray(self.weights, dtype=np.float64)
        if w.shape != (1 << self.n,):
            raise ValueError(f"expected {1 << self.n} weights, got shape {w.shape}")
        if w.min() < -PROB_TOL:
            raise ValueError(f"negative weight {w.min()}")
        if abs(w.sum() - 1.0) > PROB_TOL:
            raise ValueError(f"weights sum to {w.sum()}, not 1")
        object.__setattr__(self, "weights", w)
        w.setflags(write=False)

    def __call__(self, x: int) -> float:
        return float(self.weights[x])

    def to_csv(self) -> str:
        lines = ["x,weight"]
        for x in range(1 << self.n):
            lines.append(f"{BitVector(self.n, x)},{self.weights[x]:.17g}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_csv(cls, text: str) -> "ExactDistribution":
        lines = [ln for ln in text.splitlines() if ln]
        if not lines or lines[0] != "x,weight":
            raise ValueError("missing x,weight header")
        pairs = [ln.split(",") for ln in lines[1:]]
        n = len(pairs[0][0])
        w = np.zeros(1 << n)
        for xs, ws in pairs:
            w[BitVector.from_string(xs).bits] = float(ws)
        return cls(n, w)


@dataclass(frozen=True)
class SubspaceMixture:
    """Finite-support distribution over non-empty affine subspaces."""

    n: int
    support: tuple[tuple[AffineSubspace, float], ...]

    def __post_init__(self) -> None:
        if not self.support:
            raise ValueError("mixture support must be non-empty")
        seen = set()
        total = 0.0
        for w, p in self.support:
            if w.n != self.n:
                raise DimensionMismatch(f"{w.n} != {self.n}")
            if w.is_empty:
                raise EmptySubspaceError("mixture support must avoid the empty subspace")
            if w in seen:
                raise ValueError(f"duplicate support element {w}")
            seen.add(w)
            if p <= 0:
                raise ValueError(f"probabilities must be positive, got {p}")
            total += p
        if abs(total - 1.0) > PROB_TOL:
            raise ValueError(f"probabilities sum to {total}, not 1")

    @classmethod
    def from_pairs(cls, n: int, pairs: list[tuple[AffineSubspace, float]]) -> "SubspaceMixture":
        """Merge duplicates and normalize; order of first appearance is kept."""
        acc: dict[AffineSubspace, float] = {}
        for w, p in pairs:
            if p == 0.0:
                continue
            acc[w] = acc.get(w, 0.0) + p
        total = sum(acc.values())
        if total <= 0:
            raise ValueError("mixture has no mass")
        return cls(n, tuple((w, p / total) for w, p in acc.items()))

    def restrict(self, keep) -> tuple["SubspaceMixture", float]:
        """Condition on keep(w); returns (conditioned mixture, kept mass)."""
        kept = [(w, p) for w, p in self.support if keep(w)]
        mass = sum(p for _, p in kept)
        if mass <= 0:
            raise ValueError("conditioning event has zero mass")
        return SubspaceMixture(self.n, tuple((w, p / mass) for w, p in kept)), mass


@dataclass(frozen=True)
class FourierTable:
    """Signed coefficient table indexed by the packed frequency a."""

    n: int
    coefficients: np.ndarray

    def __post_init__(self) -> None:
        _check_table_dim(self.n)
        c = np.asarray(self.coefficients, dtype=np.float64)
        if c.shape != (1 << self.n,):
            raise ValueError(f"expected {1 << self.n} coefficients, got shape {c.shape}")
        object.__setattr__(self, "coefficients", c)
        c.setflags(write=False)


def uniform_over(w: AffineSubspace) -> ExactDistribution:
    """The uniform distribution over a non-empty affine subspace."""
    if w.is_empty:
        raise EmptySubspaceError("uniform distribution over the empty subspace")
    table = np.zeros(1 << w.n)
    table[list(w.enumerate())] = 2.0 ** (-w.dim)
    return ExactDistribution(w.n, table)


def mixture_distribution(mix: SubspaceMixture) -> ExactDistribution:
    table = np.zeros(1 << mix.n)
    for w, p in mix.support:
        table[list(w.enumerate())] += p * 2.0 ** (-w.dim)
    return ExactDistribution(mix.n, table)


def l1_distance(p: ExactDistribution, q: ExactDistribution) -> float:
    if p.n != q.n:
        raise DimensionMismatch(f"{p.n} != {q.n}")
    return float(np.abs(p.weights - q.weights).sum())


def _fwht(values: np.ndarray) -> np.ndarray:
    """In-place-style Walsh-Hadamard butterfly; returns a new array."""
    out = values.astype(np.float64, copy=True)
    h = 1
    size = out.shape[0]
    while h < size:
        for start in range(0, size, 2 * h):
            lo = out[start:start + h].copy()
            hi = out[start + h:start + 2 * h].copy()
            out[start:start + h] = lo + hi
            out[start + h:start + 2 * h] = lo - hi
        h *= 2
    return out


def walsh_transform(p: ExactDistribution) -> FourierTable:
    """coefficient(a) = 2^{-n} sum_x P(x) (-1)^{a.x}.

    Under this normalization the uniform distribution transforms to
    2^{-n} at a=0 and zero elsewhere, and Parseval reads
    sum_a coeff(a)^2 = 2^{-n} sum_x P(x)^2.
    """
    return FourierTable(p.n, _fwht(p.weights) * 2.0 ** (-p.n))


def inverse_walsh(table: FourierTable) -> ExactDistribution:
    """Inverse of walsh_transform: P(x) = sum_a coeff(a) (-1)^{a.x}."""
    return ExactDistribution(table.n, _fwht(table.coefficients))


def hyperplane_mass(mix: SubspaceMixture) -> dict[tuple[int, int], float]:
    """Pr[W ⊆ {x : a.x = b}] for every (a, b) with positive mass, a ≠ 0.

    A subspace w lies in the hyperplane (a, b) exactly when a is in the
    orthogonal space of w and a.offset = b, so the table is assembled by
    enumerating each member's orthogonal space.
    """
    table: dict[tuple[int, int], float] = {}
    for w, p in mix.support:
        off = w.offset.bits
        for a in orthogonal_space(w).enumerate():
            if a == 0:
                continue
            key = (a, parity(a & off))
            table[key] = table.get(key, 0.0) + p
    return table


@dataclass(frozen=True)
class FourierCheck:
    hypothesis_holds: bool
    max_concentration: float
    distance: float
    bound: float
    worst_hyperplane: tuple[BitVector, int] | None


def check_fourier_closeness(mix: SubspaceMixture, r: float) -> FourierCheck:
    """Test the spectral-flatness criterion for a subspace mixture.

    The hypothesis is that no hyperplane {x : a.x = b}, a != 0, contains
    the random subspace with probability above 2^{-r}; when it holds, the
    mixture's expected uniform law is within 2^{-(r - n/2)} of uniform in
    l1 distance.
    """
    n = mix.n
    if r < n / 2:
        raise ValueError(f"r must be at least n/2 = {n / 2}, got {r}")
    mass = hyperplane_mass(mix)
    if mass:
        (a, b), conc = max(mass.items(), key=lambda kv: (kv[1], (-kv[0][0], -kv[0][1])))
        worst = (BitVector(n, a), b)
    else:
        conc, worst = 0.0, None
    holds = conc <= 2.0 ** (-r) + 1e-12
    distance = l1_distance(mixture_distribution(mix), uniform_over(AffineSubspace.full(n)))
    return FourierCheck(holds, conc, distance, 2.0 ** (-(r - n / 2)), worst)
