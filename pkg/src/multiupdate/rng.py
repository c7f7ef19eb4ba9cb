"""Deterministic PRNG and shuffling for reproducible benchmark runs.

Mistake-rate means and stds over permutation runs are only comparable across
implementations if the permutations themselves are bit-reproducible, so the
generator is pinned: xoshiro256** seeded through splitmix64. Do not swap in a
host library RNG.
"""
from __future__ import annotations

_MASK64 = (1 << 64) - 1


def _rotl(x: int, k: int) -> int:
    return ((x << k) | (x >> (64 - k))) & _MASK64


class SplitMix64:
    """Vigna's splitmix64; used here only to expand a user seed into generator state."""

    def __init__(self, seed: int):
        self._x = seed & _MASK64

    def next_u64(self) -> int:
        self._x = (self._x + 0x9E3779B97F4A7C15) & _MASK64
        z = self._x
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        return z ^ (z >> 31)


class Xoshiro256StarStar:
    """xoshiro256** 1.0. State is four u64 words drawn from splitmix64(seed)."""

    def __init__(self, seed: int):
        sm = SplitMix64(seed)
        self._s = [sm.next_u64(), sm.next_u64(), sm.next_u64(), sm.next_u64()]

    def next_u64(self) -> int:
        s0, s1, s2, s3 = self._s
        result = (_rotl((s1 * 5) & _MASK64, 7) * 9) & _MASK64
        t = (s1 << 17) & _MASK64
        s2 ^= s0
        s3 ^= s1
        s1 ^= s2
        s0 ^= s3
        s2 ^= t
        s3 = _rotl(s3, 45)
        self._s = [s0, s1, s2, s3]
        return result

    def next_float(self) -> float:
        """Uniform double in [0, 1) using the top 53 bits."""
        return (self.next_u64() >> 11) * (2.0 ** -53)


def permutation(n: int, seed: int) -> list[int]:
    """Fisher-Yates shuffle of range(n), fully pinned for reproducibility.

    The exact procedure (part of the output contract, do not change): start
    from the identity [0..n), iterate i from n-1 down to 1, draw one u64 from
    xoshiro256**(splitmix64(seed)) per step, and swap positions i and
    j = draw % (i + 1). Modulo bias is irrelevant at benchmark scale and the
    simple reduction keeps the sequence easy to reproduce elsewhere.
    """
    if n < 1:
        raise ValueError("permutation needs n >= 1")
    rng = Xoshiro256StarStar(seed)
    perm = list(range(n))
    for i in range(n - 1, 0, -1):
        j = rng.next_u64() % (i + 1)
        perm[i], perm[j] = perm[j], perm[i]
    return perm
