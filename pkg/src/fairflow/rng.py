"""Portable, seedable pseudo-random numbers.

Everything that needs randomness (splits, synthetic data, samplers,
resampling) goes through :class:`Xoshiro256StarStar` so that results are
reproducible bit-for-bit across platforms and implementations:

* ``SplitMix64`` and ``xoshiro256**`` follow the public-domain reference
  code by Blackman and Vigna; xoshiro state is seeded from four SplitMix64
  outputs of the integer seed.
* ``random()`` uses the top 53 bits: ``(x >> 11) * 2**-53``.
* ``below(n)`` is unbiased modulo reduction with rejection of the lowest
  ``2**64 mod n`` raw values.
* ``shuffle`` is Fisher-Yates from the last index down.
* ``normal()`` is Box-Muller consuming two uniforms per variate, cosine branch.

Independent streams are derived with :func:`derive_seed`.
"""

from __future__ import annotations

import hashlib
import math
from typing import MutableSequence, Sequence, TypeVar

MASK64 = (1 << 64) - 1
T = TypeVar("T")


def _rotl(x: int, k: int) -> int:
    return ((x << k) | (x >> (64 - k))) & MASK64


class SplitMix64:
    def __init__(self, seed: int):
        self.state = seed & MASK64

    def next_u64(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
        return z ^ (z >> 31)


class Xoshiro256StarStar:
    """xoshiro256** 1.0 with the derived sampling helpers listed in the module doc."""

    def __init__(self, seed: int = 0, *, state: Sequence[int] | None = None):
        if state is not None:
            if len(state) != 4 or not any(state):
                raise ValueError("state must be four 64-bit words, not all zero")
            self.s = [int(v) & MASK64 for v in state]
        else:
            if seed < 0:
                raise ValueError("seed must be an unsigned integer")
            sm = SplitMix64(seed)
            self.s = [sm.next_u64() for _ in range(4)]

    def next_u64(self) -> int:
        s = self.s
        result = (_rotl((s[1] * 5) & MASK64, 7) * 9) & MASK64
        t = (s[1] << 17) & MASK64
        s[2] ^= s[0]
        s[3] ^= s[1]
        s[1] ^= s[2]
        s[0] ^= s[3]
        s[2] ^= t
        s[3] = _rotl(s[3], 45)
        return result

    def random(self) -> float:
        """Uniform float in [0, 1)."""
        return (self.next_u64() >> 11) * (1.0 / 9007199254740992.0)

    def uniform(self, low: float, high: float) -> float:
        return low + (high - low) * self.random()

    def below(self, n: int) -> int:
        """Uniform integer in [0, n)."""
        if n <= 0:
            raise ValueError("n must be positive")
        floor = (1 << 64) % n
        while True:
            r = self.next_u64()
            if r >= floor:
                return r % n

    def choice(self, seq: Sequence[T]) -> T:
        return seq[self.below(len(seq))]

    def shuffle(self, items: MutableSequence) -> None:
        for i in range(len(items) - 1, 0, -1):
            j = self.below(i + 1)
            items[i], items[j] = items[j], items[i]

    def permutation(self, n: int) -> list[int]:
        order = list(range(n))
        self.shuffle(order)
        return order

    def normal(self, mean: float = 0.0, sd: float = 1.0) -> float:
        u1 = 1.0 - self.random()  # (0, 1], keeps log finite
        u2 = self.random()
        return mean + sd * math.sqrt(-2.0 * math.log(u1)) * math.cos(2.0 * math.pi * u2)


def derive_seed(*parts: int | str) -> int:
    """Mix an ordered tuple of ints/strings into an unsigned 64-bit seed.

    The encoding is ``"i:<int>"`` or ``"s:<str>"`` joined by ``0x1f``, hashed
    with BLAKE2b (8-byte digest) and read big-endian. Adding a component name
    never perturbs the seeds of other names.
    """
    tokens = []
    for p in parts:
        if isinstance(p, bool) or not isinstance(p, (int, str)):
            raise TypeError(f"seed parts must be int or str, got {type(p).__name__}")
        tokens.append(f"i:{p}" if isinstance(p, int) else f"s:{p}")
    digest = hashlib.blake2b("\x1f".join(tokens).encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "big")
