"""Deterministic PRNG used for every seeded operation.

splitmix64 is fixed as the project PRNG so splits, baseline rankings and
converter sampling reproduce bit-for-bit across platforms and Python
versions (stdlib ``random`` makes no such guarantee across releases).
"""

from __future__ import annotations

from typing import MutableSequence

_MASK64 = (1 << 64) - 1


class Splitmix64:
    """splitmix64 stream (Steele et al.); pure integer arithmetic."""

    def __init__(self, seed: int):
        self._state = seed & _MASK64

    def next_u64(self) -> int:
        self._state = (self._state + 0x9E3779B97F4A7C15) & _MASK64
        z = self._state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        return z ^ (z >> 31)

    def next_float(self) -> float:
        """Uniform float in [0, 1) with 53 bits of precision."""
        return (self.next_u64() >> 11) * 2.0**-53

    def randrange(self, n: int) -> int:
        # Modulo bias is < n/2^64; accepted for determinism and simplicity.
        if n <= 0:
            raise ValueError("randrange needs n >= 1")
        return self.next_u64() % n

    def shuffle(self, items: MutableSequence) -> None:
        """In-place Fisher-Yates, descending index."""
        for i in range(len(items) - 1, 0, -1):
            j = self.randrange(i + 1)
            items[i], items[j] = items[j], items[i]
