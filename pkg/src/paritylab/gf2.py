"""Bit-packed GF(2) vectors, subspaces, and affine subspaces in canonical form.

Vectors are packed into Python ints: bit i of the word is coordinate i+1,
so coordinate 1 is the least significant bit.  Textual forms print
coordinate 1 leftmost.  Subspace bases are kept in reduced row echelon
form (RREF) and affine offsets are reduced to have a 0 in every pivot
column, which makes equality and hashing purely structural.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Iterator

import numpy as np

# Canonical subspace machinery keeps exact 2^n tables elsewhere in the
# package; 24 coordinates is the supported ceiling for it.  Plain vectors
# (stream-mode crypto) may be longer.
MAX_SUBSPACE_DIM = 24


class DimensionMismatch(ValueError):
    pass


class EmptySubspaceError(ValueError):
    pass


def parity(v: int) -> int:
    """Parity of the popcount of v."""
    return bin(v).count("1") & 1


def lowest_set_bit(v: int) -> int:
    """Index of the least significant set bit (v must be nonzero)."""
    return (v & -v).bit_length() - 1


@dataclass(frozen=True, slots=True)
class BitVector:
    """A vector in {0,1}^n, packed LSB-first (bit i = coordinate i+1)."""

    n: int
    bits: int

    def __post_init__(self) -> None:
        if self.n < 0:
            raise ValueError(f"dimension must be nonnegative, got {self.n}")
        if self.bits < 0 or self.bits >> self.n:
            raise ValueError(f"bits 0x{self.bits:x} out of range for n={self.n}")

    def __str__(self) -> str:
        return "".join("1" if (self.bits >> i) & 1 else "0" for i in range(self.n))

    @classmethod
    def from_string(cls, text: str) -> "BitVector":
        if set(text) - {"0", "1"}:
            raise ValueError(f"not a 0/1 string: {text!r}")
        bits = 0
        for i, ch in enumerate(text):
            if ch == "1":
                bits |= 1 << i
        return cls(len(text), bits)

    @classmethod
    def zero(cls, n: int) -> "BitVector":
        return cls(n, 0)

    @classmethod
    def unit(cls, n: int, coordinate: int) -> "BitVector":
        """Standard basis vector e_coordinate (1-based coordinate index)."""
        if not 1 <= coordinate <= n:
            raise ValueError(f"coordinate {coordinate} out of range for n={n}")
        return cls(n, 1 << (coordinate - 1))

    def coordinate(self, i: int) -> int:
        """Value of coordinate i (1-based)."""
        if not 1 <= i <= self.n:
            raise ValueError(f"coordinate {i} out of range for n={self.n}")
        return (self.bits >> (i - 1)) & 1

    def weight(self) -> int:
        return bin(self.bits).count("1")

    def __xor__(self, other: "BitVector") -> "BitVector":
        if self.n != other.n:
            raise DimensionMismatch(f"{self.n} != {other.n}")
        return BitVector(self.n, self.bits ^ other.bits)

    def dot(self, other: "BitVector") -> int:
        if self.n != other.n:
            raise DimensionMismatch(f"{self.n} != {other.n}")
        return parity(self.bits & other.bits)


def inner_product(a: BitVector, x: BitVector) -> int:
    """Inner product modulo 2."""
    return a.dot(x)


def _rref_ints(rows: Iterable[int]) -> list[int]:
    """RREF a collection of packed rows; returns rows sorted by pivot."""
    basis: list[int] = []
    for row in rows:
        v = row
        for b in basis:
            if (v >> lowest_set_bit(b)) & 1:
                v ^= b
        if v == 0:
            continue
        p = lowest_set_bit(v)
        basis = [b ^ v if (b >> p) & 1 else b for b in basis]
        basis.append(v)
    basis.sort(key=lowest_set_bit)
    return basis


@dataclass(frozen=True, slots=True)
class VectorSubspace:
    """A linear subspace of {0,1}^n, basis rows in RREF (pivots increasing)."""

    n: int
    rows: tuple[int, ...]

    def __post_init__(self) -> None:
        if not 0 <= self.n <= MAX_SUBSPACE_DIM:
            raise ValueError(f"ambient dimension {self.n} outside [0, {MAX_SUBSPACE_DIM}]")
        pivots = []
        for r in self.rows:
            if r == 0 or r >> self.n:
                raise ValueError("basis rows must be nonzero n-bit words")
            pivots.append(lowest_set_bit(r))
        if pivots != sorted(set(pivots)):
            raise ValueError("basis rows must have strictly increasing pivots")
        for r in self.rows:
            for p in pivots:
                if p != lowest_set_bit(r) and (r >> p) & 1:
                    raise ValueError("basis not in RREF: pivot column reused")

    @classmethod
    def from_rows(cls, n: int, rows: Iterable[int]) -> "VectorSubspace":
        return cls(n, tuple(_rref_ints(rows)))

    @property
    def dim(self) -> int:
        return len(self.rows)

    @property
    def pivots(self) -> tuple[int, ...]:
        return tuple(lowest_set_bit(r) for r in self.rows)

    @property
    def basis(self) -> tuple[BitVector, ...]:
        return tuple(BitVector(self.n, r) for r in self.rows)

    def reduce(self, v: int) -> int:
        """Reduce v modulo the row span (zeroes every pivot coordinate)."""
        for r in self.rows:
            if (v >> lowest_set_bit(r)) & 1:
                v ^= r
        return v

    def contains(self, v: int) -> bool:
        return self.reduce(v) == 0

    def sum_with(self, other: "VectorSubspace") -> "VectorSubspace":
        if self.n != other.n:
            raise DimensionMismatch(f"{self.n} != {other.n}")
        return VectorSubspace.from_rows(self.n, self.rows + other.rows)

    def null_space(self) -> "VectorSubspace":
        """The space {a : a.r = 0 for every basis row r}."""
        return _null_space_cached(self.n, self.rows)

    def enumerate(self) -> Iterator[int]:
        """All 2^dim elements (subset XORs of the basis)."""
        k = len(self.rows)
        for mask in range(1 << k):
            v = 0
            m = mask
            while m:
                i = lowest_set_bit(m)
                v ^= self.rows[i]
                m &= m - 1
            yield v


@lru_cache(maxsize=65536)
def _null_space_cached(n: int, rows: tuple[int, ...]) -> VectorSubspace:
    piv = {lowest_set_bit(r) for r in rows}
    gens = []
    for f in range(n):
        if f in piv:
            continue
        v = 1 << f
        for r in rows:
            if (r >> f) & 1:
                v |= 1 << lowest_set_bit(r)
        gens.append(v)
    return VectorSubspace.from_rows(n, gens)


def rref(rows: list[BitVector], n: int | None = None) -> tuple[VectorSubspace, int]:
    """Row-reduce GF(2) vectors; returns (canonical basis, rank).

    n is only needed to disambiguate the empty row list.
    """
    if not rows:
        if n is None:
            raise ValueError("empty row list needs an explicit dimension")
        return VectorSubspace(n, ()), 0
    if n is None:
        n = rows[0].n
    for r in rows:
        if r.n != n:
            raise DimensionMismatch(f"mixed dimensions {r.n} and {n}")
    space = VectorSubspace.from_rows(n, (r.bits for r in rows))
    return space, space.dim


@dataclass(frozen=True, slots=True)
class AffineSubspace:
    """A coset of a linear subspace of {0,1}^n, or the distinguished Empty.

    Canonical form: RREF direction basis, offset zero on all pivot columns.
    Empty is represented with direction == offset == None; dim is undefined
    for it and must not be queried.
    """

    n: int
    direction: VectorSubspace | None
    offset: BitVector | None

    def __post_init__(self) -> None:
        if not 0 <= self.n <= MAX_SUBSPACE_DIM:
            raise ValueError(f"ambient dimension {self.n} outside [0, {MAX_SUBSPACE_DIM}]")
        if (self.direction is None) != (self.offset is None):
            raise ValueError("direction and offset must both be set or both be None")
        if self.direction is not None:
            if self.direction.n != self.n or self.offset.n != self.n:
                raise DimensionMismatch("ambient dimension mismatch")
            for p in self.direction.pivots:
                if (self.offset.bits >> p) & 1:
                    raise ValueError("offset not reduced: nonzero pivot coordinate")

    @property
    def is_empty(self) -> bool:
        return self.direction is None

    @property
    def dim(self) -> int:
        if self.is_empty:
            raise EmptySubspaceError("dim of the empty subspace is undefined")
        return self.direction.dim

    @classmethod
    def empty(cls, n: int) -> "AffineSubspace":
        return cls(n, None, None)

    @classmethod
    def from_parts(cls, offset: BitVector, direction: VectorSubspace) -> "AffineSubspace":
        """Canonicalize an arbitrary (offset, direction) description."""
        if offset.n != direction.n:
            raise DimensionMismatch(f"{offset.n} != {direction.n}")
        return cls(direction.n, direction, BitVector(direction.n, direction.reduce(offset.bits)))

    @classmethod
    def from_generators(cls, offset: BitVector, generators: Iterable[BitVector]) -> "AffineSubspace":
        direction = VectorSubspace.from_rows(offset.n, (g.bits for g in generators))
        return cls.from_parts(offset, direction)

    @classmethod
    def full(cls, n: int) -> "AffineSubspace":
        return cls.from_parts(BitVector.zero(n), VectorSubspace.from_rows(n, (1 << i for i in range(n))))

    @classmethod
    def point(cls, p: BitVector) -> "AffineSubspace":
        return cls(p.n, VectorSubspace(p.n, ()), p)

    @classmethod
    def from_points(cls, n: int, points: Iterable[int]) -> "AffineSubspace":
        """Affine hull of packed points (the empty iterable gives Empty)."""
        pts = list(points)
        if not pts:
            return cls.empty(n)
        base = pts[0]
        direction = VectorSubspace.from_rows(n, (p ^ base for p in pts[1:]))
        return cls.from_parts(BitVector(n, base), direction)

    def size(self) -> int:
        return 0 if self.is_empty else 1 << self.dim

    def enumerate(self) -> Iterator[int]:
        if self.is_empty:
            return
        base = self.offset.bits
        for v in self.direction.enumerate():
            yield base ^ v

    def to_text(self) -> str:
        if self.is_empty:
            return "EMPTY"
        rows = ",".join(str(BitVector(self.n, r)) for r in self.direction.rows)
        return f"{self.offset}|{rows}"

    def __str__(self) -> str:
        return self.to_text()


def parse_subspace(text: str, n: int) -> AffineSubspace:
    """Inverse of AffineSubspace.to_text for a known ambient dimension."""
    if text == "EMPTY":
        return AffineSubspace.empty(n)
    try:
        offset_part, rows_part = text.split("|")
    except ValueError:
        raise ValueError(f"malformed subspace text: {text!r}") from None
    offset = BitVector.from_string(offset_part)
    if offset.n != n:
        raise DimensionMismatch(f"expected n={n}, got {offset.n}")
    gens = [BitVector.from_string(r) for r in rows_part.split(",")] if rows_part else []
    return AffineSubspace.from_generators(offset, gens)


def intersect_hyperplane(w: AffineSubspace, a: BitVector, b: int) -> AffineSubspace:
    """Canonical form of w ∩ {x : a.x = b}.

    Returns Empty when the constraint contradicts w, w itself when it is
    redundant, and otherwise drops the dimension by exactly one.
    """
    if b not in (0, 1):
        raise ValueError(f"b must be a bit, got {b}")
    if w.n != a.n:
        raise DimensionMismatch(f"{w.n} != {a.n}")
    if w.is_empty:
        return w
    hit = [r for r in w.direction.rows if parity(a.bits & r)]
    c = parity(a.bits & w.offset.bits)
    if not hit:
        return w if c == b else AffineSubspace.empty(w.n)
    d0 = hit[0]
    new_rows = [r ^ d0 if parity(a.bits & r) and r != d0 else r
                for r in w.direction.rows if r != d0]
    new_offset = w.offset.bits ^ d0 if c != b else w.offset.bits
    return AffineSubspace.from_parts(BitVector(w.n, new_offset),
                                     VectorSubspace.from_rows(w.n, new_rows))


def orthogonal_space(w: AffineSubspace) -> VectorSubspace:
    """The space of directions a that are constant (a.x = const) on w."""
    if w.is_empty:
        raise EmptySubspaceError("orthogonal space of the empty subspace")
    return w.direction.null_space()


def contains(w: AffineSubspace, x: BitVector) -> bool:
    """Whether the point x lies in w (always False for Empty)."""
    if w.n != x.n:
        raise DimensionMismatch(f"{w.n} != {x.n}")
    if w.is_empty:
        return False
    return w.direction.contains(x.bits ^ w.offset.bits)


def is_subset(w1: AffineSubspace, w2: AffineSubspace) -> bool:
    """Whether every point of w1 lies in w2 (Empty is a subset of anything)."""
    if w1.n != w2.n:
        raise DimensionMismatch(f"{w1.n} != {w2.n}")
    if w1.is_empty:
        return True
    if w2.is_empty:
        return False
    if not w2.direction.contains(w1.offset.bits ^ w2.offset.bits):
        return False
    return all(w2.direction.contains(r) for r in w1.direction.rows)


def sample_point(w: AffineSubspace, rng: np.random.Generator) -> BitVector:
    """A uniformly random point of w."""
    if w.is_empty:
        raise EmptySubspaceError("cannot sample from the empty subspace")
    v = w.offset.bits
    if w.direction.rows:
        mask = int(rng.integers(0, 1 << w.direction.dim))
        for i, r in enumerate(w.direction.rows):
            if (mask >> i) & 1:
                v ^= r
    return BitVector(w.n, v)


def solve_affine_system(n: int, equations: Iterable[tuple[int, int]]) -> AffineSubspace:
    """Solution set of the system {a.x = b}, packed (a_bits, b) pairs.

    Returns Empty for an inconsistent system and the full space for an
    empty one.
    """
    aug = _rref_ints((a | (b << n)) for a, b in equations)
    coeff_rows = []
    offset = 0
    for row in aug:
        a_part = row & ((1 << n) - 1)
        b_part = (row >> n) & 1
        if a_part == 0:
            if b_part:
                return AffineSubspace.empty(n)
            continue
        coeff_rows.append(a_part)
        if b_part:
            offset |= 1 << lowest_set_bit(a_part)
    direction = VectorSubspace.from_rows(n, coeff_rows).null_space()
    return AffineSubspace.from_parts(BitVector(n, offset), direction)
