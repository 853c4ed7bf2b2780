"""Deterministic random numbers and seed derivation.

Everything that draws randomness in this package goes through SplitMix64,
a tiny counter-based generator with a published reference algorithm
(Steele, Lea, Flood 2014). It is exactly reproducible from a 64-bit seed
on any platform, which is what the experiment configs promise. numpy
generators are only used where bulk sampling is needed, always seeded
from values produced here.
"""

from __future__ import annotations

_MASK = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB


class SplitMix64:
    """Reference splitmix64 stream over a 64-bit state."""

    def __init__(self, seed: int):
        self.state = seed & _MASK

    def next_u64(self) -> int:
        self.state = (self.state + _GAMMA) & _MASK
        z = self.state
        z = ((z ^ (z >> 30)) * _MIX1) & _MASK
        z = ((z ^ (z >> 27)) * _MIX2) & _MASK
        return z ^ (z >> 31)

    def next_float(self) -> float:
        # 53 high bits -> uniform double in [0, 1)
        return (self.next_u64() >> 11) * (2.0 ** -53)

    def next_below(self, n: int) -> int:
        """Uniform integer in [0, n). n must be positive."""
        if n <= 0:
            raise ValueError("n must be positive")
        return int(self.next_float() * n) % n

    def shuffled(self, n: int) -> list[int]:
        """Fisher-Yates permutation of range(n)."""
        order = list(range(n))
        for i in range(n - 1, 0, -1):
            j = self.next_below(i + 1)
            order[i], order[j] = order[j], order[i]
        return order


def derive_seed(master: int, *tokens) -> int:
    """Derive a stage seed from a master seed and a tag sequence.

    Tokens (strings or ints) are absorbed into a splitmix stream
    byte-by-byte, so ("train", 25) and ("train", 2) // (5,) cannot
    collide by concatenation. Stable across platforms and runs; never
    uses Python's salted hash().
    """
    g = SplitMix64(master)
    g.next_u64()
    for tok in tokens:
        data = str(tok).encode("utf-8")
        g.state ^= len(data) & _MASK
        g.next_u64()
        for byte in data:
            g.state ^= byte
            g.next_u64()
    return g.next_u64()
