"""Counter-based splitmix64 pseudo-random streams.

Every stochastic choice in this package flows through this module so that a
single integer seed reproduces a run bit for bit, and so that another
implementation can replicate the streams from this description alone.

Output ``i`` (0-based) of the stream with seed ``s`` is ``fin(s + (i+1) *
GOLDEN mod 2**64)`` where ``fin`` is the splitmix64 finalizer::

    z ^= z >> 30;  z *= 0xBF58476D1CE4E5B9
    z ^= z >> 27;  z *= 0x94D049BB133111EB
    z ^= z >> 31

Uniform doubles take the top 53 bits: ``u = ((z >> 11) + 1) * 2**-53``,
giving values in (0, 1] so logarithms are always finite. Gaussians apply the
Box-Muller transform to consecutive uniform pairs. Permutations argsort
fresh 64-bit keys with a stable sort. Child seeds come from a sibling
stream (the seed xored with a fixed leaf constant) so they can never collide
with the parent's own outputs.
"""
from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
_MUL1 = 0xBF58476D1CE4E5B9
_MUL2 = 0x94D049BB133111EB
_LEAF = 0xD1B54A32D192ED03


def mix64(z: int) -> int:
    """splitmix64 finalizer on a 64-bit integer."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * _MUL1) & MASK64
    z = ((z ^ (z >> 27)) * _MUL2) & MASK64
    return z ^ (z >> 31)


def derive_seed(seed: int, index: int) -> int:
    """Child seed ``index`` of ``seed``; never collides with parent outputs."""
    base = mix64((int(seed) ^ _LEAF) & MASK64)
    return mix64((base + (int(index) + 1) * GOLDEN) & MASK64)


class Stream:
    """A deterministic draw stream; the position advances with every call."""

    def __init__(self, seed: int):
        self.seed = int(seed) & MASK64
        self.pos = 0

    def u64(self, n: int) -> np.ndarray:
        """Next ``n`` raw 64-bit outputs."""
        idx = np.arange(self.pos + 1, self.pos + n + 1, dtype=np.uint64)
        self.pos += int(n)
        z = np.uint64(self.seed) + idx * np.uint64(GOLDEN)
        z = (z ^ (z >> np.uint64(30))) * np.uint64(_MUL1)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(_MUL2)
        return z ^ (z >> np.uint64(31))

    def unit(self, n: int) -> np.ndarray:
        """``n`` uniform doubles in (0, 1]."""
        return ((self.u64(n) >> np.uint64(11)).astype(np.float64) + 1.0) * 2.0**-53

    def gauss(self, n: int) -> np.ndarray:
        """``n`` standard normal draws (consumes 2*ceil(n/2) uniforms)."""
        m = (int(n) + 1) // 2
        u1 = self.unit(m)
        u2 = self.unit(m)
        r = np.sqrt(-2.0 * np.log(u1))
        theta = (2.0 * np.pi) * u2
        return np.concatenate([r * np.cos(theta), r * np.sin(theta)])[: int(n)]

    def permutation(self, n: int) -> np.ndarray:
        """Uniform permutation of range(n)."""
        return np.argsort(self.u64(n), kind="stable")
