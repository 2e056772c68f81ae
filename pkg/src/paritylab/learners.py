"""Streaming memory-bounded learners for parity learning.

A learner is a finite-state value machine: the state is a single integer
whose bit length never exceeds the declared memory budget (hard-asserted
on every step by the simulation harness), the step map consumes one
sample, and the output map turns a state into the affine subspace of keys
the learner currently believes in.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .bp import BranchingProgram, Sample
from .config import BudgetExceeded, state_budget
from .gf2 import (
    AffineSubspace,
    BitVector,
    lowest_set_bit,
    parity,
    solve_affine_system,
)


@dataclass(frozen=True)
class Learner:
    name: str
    n: int
    memory_bits: int
    initial_state: int
    step: Callable[[int, Sample], int]
    output: Callable[[int], AffineSubspace]


@dataclass(frozen=True)
class TradeoffPoint:
    learner: str
    n: int
    memory_bits: int
    m: int
    success: float
    ci_halfwidth: float
    seed: int
    capped: bool = False

    CSV_HEADER = "learner,n,memory_bits,m,success,ci_halfwidth,seed"

    def csv_row(self) -> str:
        return (f"{self.learner},{self.n},{self.memory_bits},{self.m},"
                f"{self.success:.6f},{self.ci_halfwidth:.6f},{self.seed}")


def wilson_interval(successes: int, trials: int, z: float = 1.96) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion."""
    if trials == 0:
        return 0.0, 1.0
    phat = successes / trials
    denom = 1 + z * z / trials
    center = (phat + z * z / (2 * trials)) / denom
    half = z * math.sqrt(phat * (1 - phat) / trials + z * z / (4 * trials * trials)) / denom
    return center - half, center + half


def _decode_rows(state: int, width: int) -> list[int]:
    rows = []
    mask = (1 << width) - 1
    while state:
        rows.append(state & mask)
        state >>= width
    return rows


def _encode_rows(rows: list[int], width: int) -> int:
    state = 0
    for i, row in enumerate(rows):
        state |= row << (i * width)
    return state


def gaussian_learner(n: int) -> Learner:
    """Keeps the full row-reduced system of every sample seen.

    State: up to n augmented rows of n+1 bits in RREF (pivots in the
    coefficient part only); inconsistent samples, which cannot occur when
    b = a.x, are discarded so the step map stays total.
    """
    width = n + 1
    b_bit = 1 << n

    def step(state: int, sample: Sample) -> int:
        rows = _decode_rows(state, width)
        v = sample.a.bits | (b_bit if sample.b else 0)
        for r in rows:
            pivot = lowest_set_bit(r & ~b_bit) if r & ~b_bit else n
            if (v >> pivot) & 1:
                v ^= r
        if v & ~b_bit == 0:
            return state  # redundant, or inconsistent (impossible on honest streams)
        p = lowest_set_bit(v & ~b_bit)
        rows = [r ^ v if (r >> p) & 1 else r for r in rows]
        rows.append(v)
        rows.sort(key=lambda r: lowest_set_bit(r & ~b_bit))
        return _encode_rows(rows, width)

    def output(state: int) -> AffineSubspace:
        rows = _decode_rows(state, width)
        return solve_affine_system(n, ((r & ~b_bit, (r >> n) & 1) for r in rows))

    return Learner("gaussian", n, n * width, 0, step, output)


def prefix_pivot_learner(n: int) -> Learner:
    """Row-reduced system whose accepted rows form an identity prefix.

    Keeps k rows whose first k coefficient columns are the identity; an
    incoming sample is reduced by the current rows and accepted only when
    its leading coordinate is exactly column k+1, otherwise dropped.
    State: k plus the k x (n-k) trailing block plus the k right-hand
    bits, packed row by row at the current k's widths.
    """
    counter_bits = max(1, (n + 1 - 1).bit_length())

    def unpack(state: int) -> tuple[int, list[int]]:
        k = state & ((1 << counter_bits) - 1)
        state >>= counter_bits
        width = (n - k) + 1  # trailing block plus the b bit
        rows = []
        for _ in range(k):
            rows.append(state & ((1 << width) - 1))
            state >>= width
        return k, rows

    def pack(k: int, rows: list[int]) -> int:
        width = (n - k) + 1
        state = 0
        for i, row in enumerate(rows):
            state |= row << (i * width)
        return (state << counter_bits) | k

    def step(state: int, sample: Sample) -> int:
        k, rows = unpack(state)
        if k == n:
            return state
        # expand stored rows to full (a | b) form: row i is e_i + tail
        width = (n - k) + 1
        a = sample.a.bits
        b = sample.b
        for i in range(k):
            if (a >> i) & 1:
                tail = rows[i]
                a ^= (1 << i) | ((tail & ((1 << (n - k)) - 1)) << k)
                b ^= (tail >> (n - k)) & 1
        if not (a >> k) & 1:
            return state  # leading coordinate is not column k+1
        new_tail = (a >> (k + 1)) & ((1 << (n - k - 1)) - 1)
        new_row = new_tail | (b << (n - k - 1))
        # restore the identity prefix: eliminate column k+1 from old rows,
        # then re-pack everyone at the narrower width n-(k+1)
        narrowed = []
        for tail in rows:
            block = tail & ((1 << (n - k)) - 1)
            rhs = (tail >> (n - k)) & 1
            if block & 1:
                block >>= 1
                block ^= new_tail
                rhs ^= b
            else:
                block >>= 1
            narrowed.append(block | (rhs << (n - k - 1)))
        narrowed.append(new_row)
        return pack(k + 1, narrowed)

    def output(state: int) -> AffineSubspace:
        k, rows = unpack(state)
        equations = []
        for i, tail in enumerate(rows):
            block = tail & ((1 << (n - k)) - 1)
            rhs = (tail >> (n - k)) & 1
            equations.append(((1 << i) | (block << k), rhs))
        return solve_affine_system(n, equations)

    memory = counter_bits + max((k * ((n - k) + 1) for k in range(n + 1)), default=0)
    return Learner("prefix_pivot", n, memory, pack(0, []), step, output)


def exhaustive_learner(n: int, confirmations: int | None = None) -> Learner:
    """Cycles through candidate keys, committing after enough consecutive
    consistent samples.

    State: (candidate, consecutive-pass counter), n + ceil(log2(T+1))
    bits.  The counter saturates at the cap T (default 3n); the output is
    the candidate point once the counter reaches T and the full space
    before that.
    """
    cap = 3 * n if confirmations is None else confirmations
    if cap < 1:
        raise ValueError("need at least one confirmation")
    counter_bits = max(1, math.ceil(math.log2(cap + 1)))
    mask = (1 << n) - 1

    def step(state: int, sample: Sample) -> int:
        cand = state >> counter_bits
        count = state & ((1 << counter_bits) - 1)
        if parity(sample.a.bits & cand) != sample.b:
            cand = (cand + 1) & mask
            count = 0
        else:
            count = min(count + 1, cap)
        return (cand << counter_bits) | count

    def output(state: int) -> AffineSubspace:
        cand = state >> counter_bits
        count = state & ((1 << counter_bits) - 1)
        if count >= cap:
            return AffineSubspace.point(BitVector(n, cand))
        return AffineSubspace.full(n)

    return Learner("exhaustive", n, n + counter_bits, 0, step, output)


def assert_state_size(learner: Learner, state: int) -> None:
    if state.bit_length() > learner.memory_bits:
        raise AssertionError(
            f"{learner.name} state needs {state.bit_length()} bits, "
            f"declared {learner.memory_bits}")


def run_learner(learner: Learner, x: int, a_stream: list[int]) -> int:
    """Feed the honest sample stream (a, a.x); returns the final state."""
    state = learner.initial_state
    n = learner.n
    for a in a_stream:
        state = learner.step(state, Sample(BitVector(n, a), parity(a & x)))
        assert_state_size(learner, state)
    return state


def simulate_success(learner: Learner, m: int, trials: int,
                     rng: np.random.Generator) -> int:
    """Number of trials whose output is exactly the key point."""
    n = learner.n
    size = 1 << n
    hits = 0
    for _ in range(trials):
        x = int(rng.integers(0, size))
        state = run_learner(learner, x, [int(a) for a in rng.integers(0, size, m)])
        out = learner.output(state)
        if not out.is_empty and out.dim == 0 and out.offset.bits == x:
            hits += 1
    return hits


def learner_state_layers(learner: Learner, m: int) -> tuple[list[list[int]], list[tuple[tuple[int, ...], ...]]]:
    """Breadth-first reachable states per layer plus the transition rows."""
    n = learner.n
    degree = 1 << (n + 1)
    layers: list[list[int]] = [[learner.initial_state]]
    transitions = []
    for t in range(m):
        if len(layers[t]) * degree > state_budget():
            raise BudgetExceeded(
                f"{len(layers[t])} states x {degree} edges exceeds the state budget")
        nxt_index: dict[int, int] = {}
        nxt_layer: list[int] = []
        rows = []
        for state in layers[t]:
            row = []
            for a_bits in range(1 << n):
                for b in (0, 1):
                    new = learner.step(state, Sample(BitVector(n, a_bits), b))
                    slot = nxt_index.get(new)
                    if slot is None:
                        slot = len(nxt_layer)
                        nxt_index[new] = slot
                        nxt_layer.append(new)
                    row.append(slot)
            rows.append(tuple(row))
        transitions.append(tuple(rows))
        layers.append(nxt_layer)
    return layers, transitions


def learner_to_bp(learner: Learner, m: int) -> BranchingProgram:
    """Unroll the reachable state graph into an explicit program."""
    layers, transitions = learner_state_layers(learner, m)
    leaf_labels = {(m, v): learner.output(state) for v, state in enumerate(layers[m])}
    return BranchingProgram(learner.n, m, tuple(len(layer) for layer in layers),
                            tuple(transitions), leaf_labels)


def estimate_sample_complexity(learner: Learner, target: float,
                               rng: np.random.Generator,
                               trials: int = 2000, m_cap: int = 1 << 16,
                               seed: int = 0) -> TradeoffPoint:
    """Smallest m whose Wilson lower confidence bound reaches the target.

    Doubling search to bracket, then bisection; each probe is a fresh
    Monte Carlo estimate.
    """
    if not 0.0 < target < 1.0:
        raise ValueError(f"target must be in (0,1), got {target}")

    def lower_bound(m: int) -> tuple[float, float, float]:
        hits = simulate_success(learner, m, trials, rng)
        lo, hi = wilson_interval(hits, trials)
        return lo, hits / trials, (hi - lo) / 2

    m = 1
    lo, success, half = lower_bound(m)
    while lo < target:
        if m >= m_cap:
            return TradeoffPoint(learner.name, learner.n, learner.memory_bits,
                                 m_cap, success, half, seed, capped=True)
        m = min(m * 2, m_cap)
        lo, success, half = lower_bound(m)
    low, high = max(1, m // 2), m
    best = (m, success, half)
    while low < high:
        mid = (low + high) // 2
        lo, success, half = lower_bound(mid)
        if lo >= target:
            high = mid
            best = (mid, success, half)
        else:
            low = mid + 1
    return TradeoffPoint(learner.name, learner.n, learner.memory_bits,
                         best[0], best[1], best[2], seed)


def rank_success_probability(n: int, m: int) -> float:
    """Pr[m uniform vectors span {0,1}^n] = prod_{i<n} (1 - 2^{i-m})."""
    out = 1.0
    for i in range(n):
        out *= 1.0 - 2.0 ** (i - m)
    return max(out, 0.0)


def exhaustive_success_exact(n: int, confirmations: int, m: int) -> float:
    """Exact commitment-success probability of the candidate-cycling
    learner after m samples, by dynamic programming over (candidate
    distance to the key, counter)."""
    size = 1 << n
    cap = confirmations
    p = np.zeros((size, cap + 1))
    p[:, 0] = 1.0 / size
    for _ in range(m):
        q = np.zeros_like(p)
        q[0, 1:cap] += p[0, 0:cap - 1]
        q[0, cap] += p[0, cap - 1] + p[0, cap]
        q[1:, 1:cap] += 0.5 * p[1:, 0:cap - 1]
        q[1:, cap] += 0.5 * (p[1:, cap - 1] + p[1:, cap])
        q[0:size - 1, 0] += 0.5 * p[1:, :].sum(axis=1)
        p = q
    return float(p[0, cap])


def prefix_pivot_acceptance_probability(learner: Learner, state: int) -> float:
    """Fraction of sample vectors a (over uniform b-free honest reduction)
    that the prefix-pivot learner accepts from the given state, by
    exhaustive enumeration."""
    n = learner.n
    accepted = 0
    total = 1 << (n + 1)
    for a_bits in range(1 << n):
        for b in (0, 1):
            if learner.step(state, Sample(BitVector(n, a_bits), b)) != state:
                accepted += 1
    return accepted / total
