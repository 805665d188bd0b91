"""Deterministic, splittable pseudo-random streams.

The generator is SplitMix64: a 64-bit counter advanced by the golden-gamma
constant, output-mixed with two xor-shift-multiply rounds.  All arithmetic is
on unsigned 64-bit integers and all floating point is IEEE double, so a given
seed produces the same stream on every platform.

Child streams are derived from the *initial* seed plus a string label, never
from the current position, so splitting is order-independent.
"""

from __future__ import annotations

import math

_MASK64 = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15
_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3

# 1/2^53: a 53-bit mantissa draw maps to [0, 1) without rounding bias.
_INV_2_53 = 1.0 / 9007199254740992.0


def mix64(z: int) -> int:
    """SplitMix64 output mixer (finalizer of Stafford's mix13 variant)."""
    z &= _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def fnv1a64(data: str) -> int:
    h = _FNV_OFFSET
    for byte in data.encode("utf-8"):
        h = ((h ^ byte) * _FNV_PRIME) & _MASK64
    return h


def poisson_cdf_table(lam: float, tail: float = 1e-15) -> tuple[float, ...]:
    """Cumulative Poisson(lam) probabilities, truncated once the tail < `tail`.

    Precomputed in one place so the compiled and pure-Python kernels consume
    the identical table and stay draw-for-draw equal.
    """
    if lam <= 0:
        raise ValueError(f"lam must be positive, got {lam}")
    p = math.exp(-lam)
    cdf = [p]
    k = 0
    while 1.0 - cdf[-1] > tail and k < 1024:
        k += 1
        p *= lam / k
        cdf.append(cdf[-1] + p)
    return tuple(cdf)


class Rng:
    """A single SplitMix64 stream with convenience draws.

    Identical seed + identical call sequence => identical outputs.  Never
    share one stream across parallel workers; use :meth:`split`.
    """

    __slots__ = ("seed", "_state")

    def __init__(self, seed: int):
        self.seed = seed & _MASK64
        self._state = self.seed

    # -- state interop with the decision kernels -------------------------
    @property
    def state(self) -> int:
        return self._state

    @state.setter
    def state(self, value: int) -> None:
        self._state = value & _MASK64

    # -- core draws ------------------------------------------------------
    def next_u64(self) -> int:
        self._state = (self._state + _GAMMA) & _MASK64
        return mix64(self._state)

    def random(self) -> float:
        """Uniform double in [0, 1)."""
        return (self.next_u64() >> 11) * _INV_2_53

    def randrange(self, n: int) -> int:
        """Uniform integer in [0, n), bias-free via rejection."""
        if n <= 0:
            raise ValueError(f"randrange bound must be positive, got {n}")
        threshold = ((1 << 64) // n) * n
        while True:
            x = self.next_u64()
            if x < threshold:
                return x % n

    def choice(self, seq):
        return seq[self.randrange(len(seq))]

    def shuffle(self, items: list) -> None:
        """In-place Fisher-Yates."""
        for i in range(len(items) - 1, 0, -1):
            j = self.randrange(i + 1)
            items[i], items[j] = items[j], items[i]

    def permutation(self, n: int) -> list[int]:
        perm = list(range(n))
        self.shuffle(perm)
        return perm

    def poisson(self, cdf: tuple[float, ...], min_value: int = 0) -> int:
        """Draw from the tabulated Poisson CDF, redrawing below `min_value`."""
        while True:
            u = self.random()
            k = 0
            while k < len(cdf) - 1 and u >= cdf[k]:
                k += 1
            if k >= min_value:
                return k

    # -- splitting -------------------------------------------------------
    def split(self, label) -> "Rng":
        """Derive an independent child stream from (initial seed, label)."""
        return Rng(mix64(mix64(self.seed) ^ fnv1a64(str(label))))

    def __repr__(self) -> str:
        return f"Rng(seed={self.seed:#x})"
