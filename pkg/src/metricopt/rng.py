"""Deterministic PRNG for synthetic benchmark instances.

The generator is splitmix64: 64-bit state, additive constant
0x9E3779B97F4A7C15, mix constants 0xBF58476D1CE4E5B9 and
0x94D049BB133111EB.  It is written out in full (rather than delegating
to numpy's generators) so a port in any language can reproduce the
exact instance from the seed alone.
"""

from __future__ import annotations

_MASK = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB


class SplitMix64:
    """splitmix64 stream seeded with a 64-bit integer."""

    def __init__(self, seed: int):
        self._state = seed & _MASK

    def next_u64(self) -> int:
        self._state = (self._state + _GOLDEN) & _MASK
        z = self._state
        z = ((z ^ (z >> 30)) * _MIX1) & _MASK
        z = ((z ^ (z >> 27)) * _MIX2) & _MASK
        return z ^ (z >> 31)

    def uniform(self) -> float:
        # 53-bit mantissa, uniform on [0, 1)
        return (self.next_u64() >> 11) * 2.0**-53

    def randint(self, lo: int, hi: int) -> int:
        """Uniform integer in [lo, hi] (inclusive). Modulo bias is
        irrelevant at the ranges used here (hi - lo << 2^64)."""
        if hi < lo:
            raise ValueError("empty range")
        return lo + self.next_u64() % (hi - lo + 1)


def gnp_edges(n: int, p: float, seed: int) -> list[tuple[int, int]]:
    """Erdos-Renyi G(n, p) edge list on nodes 1..n.

    Pairs are visited in lexicographic order (1,2),(1,3),...,(n-1,n);
    one uniform draw per pair, edge kept iff u < p.
    """
    if n < 1:
        raise ValueError("n must be positive")
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must be in [0, 1]")
    rng = SplitMix64(seed)
    edges = []
    for i in range(1, n + 1):
        for j in range(i + 1, n + 1):
            if rng.uniform() < p:
                edges.append((i, j))
    return edges
