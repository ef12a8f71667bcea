"""Deterministic random streams: splitmix64 keying, xoshiro256++ generation.

Every random quantity in this package comes from a xoshiro256++ stream whose
256-bit state is expanded by splitmix64 from a 64-bit stream key. Stream keys
are derived from (seed, tag, index...) so independent parts of a computation
get independent streams and per-video work can run in any order or in
parallel without changing a single bit of output.

The exact construction, so other languages can reproduce identical datasets:

  mix64(z):  z ^= z >> 30; z *= 0xBF58476D1CE4E5B9
             z ^= z >> 27; z *= 0x94D049BB133111EB
             z ^= z >> 31                             (all mod 2**64)

  derive_key(seed, parts...):
             key = mix64(seed + GOLDEN)
             for p in parts: key = mix64(key * 0xBF58476D1CE4E5B9 + p + GOLDEN)
             with GOLDEN = 0x9E3779B97F4A7C15
             (multiply-then-add keeps the fold asymmetric, so reordering or
             swapping components always lands on a different stream)

  stream seeding: s[i] = mix64(key + (i+1) * GOLDEN) for i = 0..3
  (four successive splitmix64 outputs starting from state ``key``)

  xoshiro256++ step: out = rotl64(s0 + s3, 23) + s0, then the standard
  state update (t = s1 << 17; s2 ^= s0; s3 ^= s1; s1 ^= s2; s0 ^= s3;
  s2 ^= t; s3 = rotl64(s3, 45)).

  doubles: (out >> 11) * 2**-53, uniform on [0, 1)
  normals: Box-Muller on consecutive uniform pairs (u1, u2):
           r = sqrt(-2 ln(1 - u1)); z0 = r cos(2 pi u2); z1 = r sin(2 pi u2)
  bounded ints (shuffles, votes): out mod bound

Stream tags are small integers, unique across the package.
"""
from __future__ import annotations

from typing import Sequence

import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
_M1 = 0xBF58476D1CE4E5B9
_M2 = 0x94D049BB133111EB

# stream tags; unique so no two purposes ever share a stream for one seed
TAG_POPULATION = 1  # per-video group draws, labels, base latents
TAG_SEGMENTS = 2  # per-video piecewise-constant segment layout
TAG_FRAMES = 3  # per-frame attribute noise
TAG_VISUAL = 4  # per-frame visual embedding noise
TAG_AUDIO = 5  # per-slice audio embedding noise
TAG_PROJECTION = 6  # embedding projection matrices
TAG_SPLIT = 7  # dataset split shuffle
TAG_INIT = 8  # layer parameter initialization
TAG_BATCH = 9  # mini-batch shuffle per epoch
TAG_GRADCHECK = 10  # gradient-check sample synthesis
TAG_ABLATION = 11  # per-config sub-seeds inside an ablation run


def mix64(z: int) -> int:
    """splitmix64 finalizer on a 64-bit integer (pure Python, exact)."""
    z &= MASK64
    z ^= z >> 30
    z = (z * _M1) & MASK64
    z ^= z >> 27
    z = (z * _M2) & MASK64
    z ^= z >> 31
    return z


def derive_key(seed: int, *parts: int) -> int:
    """Fold (seed, parts...) into a 64-bit stream key.

    The absorb step is key * M1 + part + GOLDEN before the finalizer; the
    multiplication makes the fold asymmetric in (key, part), so distinct
    component tuples never alias by commuting or by seed == part.
    """
    key = mix64((seed + GOLDEN) & MASK64)
    for part in parts:
        key = mix64((key * _M1 + part + GOLDEN) & MASK64)
    return key


def _mix64_arr(z: np.ndarray) -> np.ndarray:
    z = z ^ (z >> np.uint64(30))
    z = z * np.uint64(_M1)
    z = z ^ (z >> np.uint64(27))
    z = z * np.uint64(_M2)
    return z ^ (z >> np.uint64(31))


def derive_keys(seed: int, *parts) -> np.ndarray:
    """Vectorized :func:`derive_key`; any part may be an integer array.

    Array parts broadcast against each other; the result has the broadcast
    shape and matches derive_key element-wise.
    """
    golden = np.uint64(GOLDEN)
    key = _mix64_arr(np.atleast_1d(np.asarray(seed, dtype=np.uint64)) + golden)
    for part in parts:
        p = np.atleast_1d(np.asarray(part, dtype=np.uint64))
        key = _mix64_arr(key * np.uint64(_M1) + p + golden)
    return key


def _rotl(x: int, k: int) -> int:
    return ((x << k) | (x >> (64 - k))) & MASK64


class Xoshiro256PP:
    """Scalar xoshiro256++ stream over Python integers; exact and portable."""

    __slots__ = ("_s",)

    def __init__(self, key: int) -> None:
        self._s = [mix64((key + (i + 1) * GOLDEN) & MASK64) for i in range(4)]

    @classmethod
    def from_state(cls, state: Sequence[int]) -> "Xoshiro256PP":
        rng = cls.__new__(cls)
        rng._s = [s & MASK64 for s in state]
        if len(rng._s) != 4:
            raise ValueError("xoshiro256++ state must have 4 words")
        return rng

    def next_u64(self) -> int:
        s0, s1, s2, s3 = self._s
        out = (_rotl((s0 + s3) & MASK64, 23) + s0) & MASK64
        t = (s1 << 17) & MASK64
        s2 ^= s0
        s3 ^= s1
        s1 ^= s2
        s0 ^= s3
        s2 ^= t
        s3 = _rotl(s3, 45)
        self._s = [s0, s1, s2, s3]
        return out

    def next_float(self) -> float:
        return (self.next_u64() >> 11) * 2.0**-53

    def next_below(self, bound: int) -> int:
        if bound <= 0:
            raise ValueError("bound must be positive")
        return self.next_u64() % bound

    def floats(self, n: int) -> np.ndarray:
        return np.array([self.next_float() for _ in range(n)], dtype=np.float64)

    def normals(self, n: int) -> np.ndarray:
        pairs = (n + 1) // 2
        u = self.floats(2 * pairs)
        u1, u2 = u[0::2], u[1::2]
        r = np.sqrt(-2.0 * np.log1p(-u1))
        theta = 2.0 * np.pi * u2
        z = np.empty(2 * pairs, dtype=np.float64)
        z[0::2] = r * np.cos(theta)
        z[1::2] = r * np.sin(theta)
        return z[:n]

    def shuffle(self, items: list) -> None:
        """In-place Fisher-Yates, high index down, j = next_u64() mod (i+1)."""
        for i in range(len(items) - 1, 0, -1):
            j = self.next_below(i + 1)
            items[i], items[j] = items[j], items[i]


def _rotl_arr(x: np.ndarray, k: int) -> np.ndarray:
    return (x << np.uint64(k)) | (x >> np.uint64(64 - k))


class Xoshiro256PPBank:
    """Many parallel xoshiro256++ streams, stepped in lockstep over numpy.

    Stream ``i`` of the bank is bit-identical to ``Xoshiro256PP(keys[i])``;
    the bank exists purely so wide synthetic generation is vectorized.
    """

    __slots__ = ("_s0", "_s1", "_s2", "_s3")

    def __init__(self, keys: np.ndarray) -> None:
        keys = np.atleast_1d(np.asarray(keys, dtype=np.uint64))
        self._s0 = _mix64_arr(keys + np.uint64(1 * GOLDEN & MASK64))
        self._s1 = _mix64_arr(keys + np.uint64(2 * GOLDEN & MASK64))
        self._s2 = _mix64_arr(keys + np.uint64(3 * GOLDEN & MASK64))
        self._s3 = _mix64_arr(keys + np.uint64(4 * GOLDEN & MASK64))

    def __len__(self) -> int:
        return len(self._s0)

    def next_u64(self) -> np.ndarray:
        s0, s1, s2, s3 = self._s0, self._s1, self._s2, self._s3
        out = _rotl_arr(s0 + s3, 23) + s0
        t = s1 << np.uint64(17)
        s2 = s2 ^ s0
        s3 = s3 ^ s1
        s1 = s1 ^ s2
        s0 = s0 ^ s3
        s2 = s2 ^ t
        s3 = _rotl_arr(s3, 45)
        self._s0, self._s1, self._s2, self._s3 = s0, s1, s2, s3
        return out

    def uniforms(self, n: int) -> np.ndarray:
        """(len(bank), n) doubles in [0, 1); column j is draw j of each stream."""
        out = np.empty((len(self), n), dtype=np.float64)
        for j in range(n):
            out[:, j] = (self.next_u64() >> np.uint64(11)) * 2.0**-53
        return out

    def normals(self, n: int) -> np.ndarray:
        """(len(bank), n) standard normals via Box-Muller on uniform pairs."""
        pairs = (n + 1) // 2
        u = self.uniforms(2 * pairs)
        u1, u2 = u[:, 0::2], u[:, 1::2]
        r = np.sqrt(-2.0 * np.log1p(-u1))
        theta = 2.0 * np.pi * u2
        z = np.empty((len(self), 2 * pairs), dtype=np.float64)
        z[:, 0::2] = r * np.cos(theta)
        z[:, 1::2] = r * np.sin(theta)
        return z[:, :n]
