"""Inner-product one-time-pad encryption with a memory-bounded attacker
harness.

Each plaintext bit M is sent as a frame (a, M xor a.x) with a fresh
uniform a; the receiver, sharing the key x, recovers M by XORing a.x back
out.  The attack harness feeds attackers the pad stream (a_t, b_t) with
b_t = a_t.x and measures exact-key recovery and next-bit prediction,
asserting the attacker's declared memory budget on every step.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .gf2 import AffineSubspace, BitVector, parity, sample_point, solve_affine_system
from .learners import wilson_interval

MAGIC = b"BSC1"
VERSION = 1
HARNESS_MAX_N = 24


class FormatError(ValueError):
    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (byte offset {offset})")
        self.offset = offset


@dataclass(frozen=True, slots=True)
class SecretKey:
    n: int
    x: BitVector

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError("key length must be at least 1")
        if self.x.n != self.n:
            raise ValueError("key vector dimension mismatch")


@dataclass(frozen=True, slots=True)
class Frame:
    a: BitVector
    c: int


def random_vector(n: int, rng: np.random.Generator) -> BitVector:
    """Uniform n-bit vector (n may exceed the subspace-machinery cap)."""
    nbytes = (n + 7) // 8
    bits = int.from_bytes(rng.bytes(nbytes), "big") & ((1 << n) - 1)
    return BitVector(n, bits)


def keygen(n: int, rng: np.random.Generator) -> SecretKey:
    return SecretKey(n, random_vector(n, rng))


def encrypt_bit(key: SecretKey, m: int, rng: np.random.Generator) -> Frame:
    if m not in (0, 1):
        raise ValueError(f"plaintext bit must be 0 or 1, got {m}")
    a = random_vector(key.n, rng)
    return Frame(a, m ^ parity(a.bits & key.x.bits))


def decrypt_bit(key: SecretKey, frame: Frame) -> int:
    if frame.a.n != key.n:
        raise ValueError(f"frame dimension {frame.a.n} != key dimension {key.n}")
    return frame.c ^ parity(frame.a.bits & key.x.bits)


def reverse_bits(v: int, n: int) -> int:
    out = 0
    for i in range(n):
        out = (out << 1) | ((v >> i) & 1)
    return out


def frame_to_bytes(frame: Frame) -> bytes:
    """Coordinate 1 in the most significant bit of the first byte, the
    cipher bit immediately after coordinate n, zero padding to the byte
    boundary."""
    n = frame.a.n
    nbytes = (n + 1 + 7) // 8
    payload = (reverse_bits(frame.a.bits, n) << 1) | frame.c
    payload <<= nbytes * 8 - (n + 1)
    return payload.to_bytes(nbytes, "big")


def frame_from_bytes(data: bytes, n: int) -> Frame:
    nbytes = (n + 1 + 7) // 8
    if len(data) != nbytes:
        raise ValueError(f"expected {nbytes} frame bytes, got {len(data)}")
    payload = int.from_bytes(data, "big") >> (nbytes * 8 - (n + 1))
    return Frame(BitVector(n, reverse_bits(payload >> 1, n)), payload & 1)


def _iter_bits(data: bytes):
    for byte in data:
        for i in range(7, -1, -1):
            yield (byte >> i) & 1


def encode_stream(key: SecretKey, plaintext: bytes, rng: np.random.Generator) -> bytes:
    """Header (magic, version, n, bit count) followed by one frame per
    plaintext bit, bits taken MSB-first within each byte."""
    out = bytearray()
    out += MAGIC
    out.append(VERSION)
    out += key.n.to_bytes(2, "big")
    out += (8 * len(plaintext)).to_bytes(8, "big")
    for bit in _iter_bits(plaintext):
        out += frame_to_bytes(encrypt_bit(key, bit, rng))
    return bytes(out)


def decode_stream(key: SecretKey, data: bytes) -> bytes:
    if data[:4] != MAGIC:
        raise FormatError(f"bad magic {data[:4]!r}", 0)
    if len(data) < 15:
        raise FormatError("truncated header", len(data))
    if data[4] != VERSION:
        raise FormatError(f"unsupported version {data[4]}", 4)
    n = int.from_bytes(data[5:7], "big")
    if n != key.n:
        raise FormatError(f"stream n={n} does not match key n={key.n}", 5)
    bit_count = int.from_bytes(data[7:15], "big")
    if bit_count % 8:
        raise FormatError(f"bit count {bit_count} is not byte-aligned", 7)
    frame_len = (n + 1 + 7) // 8
    expected = 15 + bit_count * frame_len
    if len(data) != expected:
        raise FormatError(
            f"expected {expected} bytes for {bit_count} frames, got {len(data)}",
            min(len(data), expected))
    bits = []
    for i in range(bit_count):
        start = 15 + i * frame_len
        frame = frame_from_bytes(data[start:start + frame_len], n)
        bits.append(decrypt_bit(key, frame))
    out = bytearray()
    for i in range(0, len(bits), 8):
        byte = 0
        for b in bits[i:i + 8]:
            byte = (byte << 1) | b
        out.append(byte)
    return bytes(out)


@dataclass(frozen=True)
class Attacker:
    """Streaming adversary with an explicit memory budget.

    States are opaque to the harness; state_bits reports the serialized
    size of a state and must never exceed memory_bits.
    """

    name: str
    n: int
    memory_bits: int
    initial_state: object
    observe: Callable[[object, int, int], object]     # (state, a_bits, b) -> state
    guess_key: Callable[[object, np.random.Generator], int]
    predict_bit: Callable[[object, int, np.random.Generator], int]
    state_bits: Callable[[object], int]


def window_attacker(n: int, s: int) -> Attacker:
    """Remembers the last floor(s / (n+1)) full samples (FIFO), solves
    them, and guesses a uniform point of the solution subspace."""
    if s < 0:
        raise ValueError("memory budget must be nonnegative")
    capacity = s // (n + 1)

    def observe(state, a_bits, b):
        buf = state + ((a_bits, b),)
        if len(buf) > capacity:
            buf = buf[len(buf) - capacity:]
        return buf

    def solution(state) -> AffineSubspace:
        return solve_affine_system(n, state)

    def guess_key(state, rng) -> int:
        w = solution(state)
        if w.is_empty:  # impossible on honest streams
            return int(rng.integers(0, 1 << n))
        return sample_point(w, rng).bits

    def predict_bit(state, a_bits, rng) -> int:
        return parity(a_bits & guess_key(state, rng))

    def state_bits(state) -> int:
        return len(state) * (n + 1)

    return Attacker(f"window[{capacity}]", n, s, (), observe, guess_key,
                    predict_bit, state_bits)


@dataclass(frozen=True)
class AttackReport:
    n: int
    m: int
    trials: int
    key_guess_rate: float
    key_guess_ci: tuple[float, float]
    next_bit_advantage: float
    next_bit_ci: tuple[float, float]
    attacker: str
    memory_bits: int

    def to_dict(self) -> dict:
        return {
            "attacker": self.attacker, "n": self.n, "m": self.m,
            "trials": self.trials, "memory_bits": self.memory_bits,
            "key_guess_rate": self.key_guess_rate,
            "key_guess_ci": list(self.key_guess_ci),
            "next_bit_advantage": self.next_bit_advantage,
            "next_bit_ci": list(self.next_bit_ci),
        }


def run_attack(attacker: Attacker, m: int, trials: int,
               rng: np.random.Generator,
               ciphertext_only_plaintext: bytes | None = None) -> AttackReport:
    """Key-recovery and next-bit-prediction game against the pad stream.

    Per trial: fresh uniform key, m observed pairs (a_t, a_t.x), then the
    state is finalized before a fresh a_{m+1} is revealed for prediction.
    With ciphertext_only_plaintext set, the attacker instead sees
    ciphertext bits of that (known) plaintext and the harness XORs the
    known bits back in, which reduces to the same pad stream.
    """
    n = attacker.n
    if n > HARNESS_MAX_N:
        raise ValueError(f"attack harness supports n <= {HARNESS_MAX_N}")
    known_bits = None
    if ciphertext_only_plaintext is not None:
        known_bits = list(_iter_bits(ciphertext_only_plaintext))
        if len(known_bits) < m:
            raise ValueError("known plaintext shorter than the stream")
    key_hits = 0
    bit_hits = 0
    for _ in range(trials):
        x = int(rng.integers(0, 1 << n))
        state = attacker.initial_state
        if attacker.state_bits(state) > attacker.memory_bits:
            raise AssertionError("attacker initial state exceeds its memory budget")
        for t in range(m):
            a = int(rng.integers(0, 1 << n))
            b = parity(a & x)
            if known_bits is not None:
                cipher = known_bits[t] ^ b      # what the wire carries
                b = cipher ^ known_bits[t]      # known-plaintext recovery of the pad bit
            state = attacker.observe(state, a, b)
            used = attacker.state_bits(state)
            if used > attacker.memory_bits:
                raise AssertionError(
                    f"attacker state uses {used} bits, declared {attacker.memory_bits}")
        if attacker.guess_key(state, rng) == x:
            key_hits += 1
        a_next = int(rng.integers(0, 1 << n))
        if attacker.predict_bit(state, a_next, rng) == parity(a_next & x):
            bit_hits += 1
    key_lo, key_hi = wilson_interval(key_hits, trials)
    bit_lo, bit_hi = wilson_interval(bit_hits, trials)
    return AttackReport(
        n=n, m=m, trials=trials,
        key_guess_rate=key_hits / trials,
        key_guess_ci=(key_lo, key_hi),
        next_bit_advantage=abs(bit_hits / trials - 0.5),
        next_bit_ci=(bit_lo, bit_hi),
        attacker=attacker.name,
        memory_bits=attacker.memory_bits,
    )


def rank_distribution(n: int, m: int) -> list[float]:
    """Distribution of the rank of m uniform vectors in {0,1}^n."""
    probs = [1.0] + [0.0] * n
    for _ in range(m):
        nxt = [0.0] * (n + 1)
        for r, p in enumerate(probs):
            if p == 0.0:
                continue
            stay = 2.0 ** (r - n)
            nxt[r] += p * stay
            if r < n:
                nxt[r + 1] += p * (1 - stay)
        probs = nxt
    return probs


def expected_point_recovery(n: int, window: int) -> float:
    """Exact key-recovery rate of a solver that guesses a uniform point of
    the solution set of `window` random equations: E[2^{rank - n}]."""
    probs = rank_distribution(n, window)
    return sum(p * 2.0 ** (r - n) for r, p in enumerate(probs))
