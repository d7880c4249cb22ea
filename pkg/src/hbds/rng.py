"""Self-contained deterministic random streams.

All randomness in the simulator flows through splitmix64 so that runs are
bit-reproducible regardless of Python or numpy version, and so that named
substreams (mobility, traffic, behavior, ...) never interfere with each
other's draw sequences.
"""

from __future__ import annotations

_MASK64 = 0xFFFFFFFFFFFFFFFF
_GAMMA = 0x9E3779B97F4A7C15


def _mix64(z: int) -> int:
    z &= _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def _fnv1a64(text: str) -> int:
    h = 0xCBF29CE484222325
    for byte in text.encode("utf-8"):
        h = ((h ^ byte) * 0x100000001B3) & _MASK64
    return h


def substream_seed(root_seed: int, *labels: int | str) -> int:
    """Derive a child seed from a root seed and a label path."""
    state = _mix64(root_seed & _MASK64)
    for label in labels:
        token = _fnv1a64(label) if isinstance(label, str) else (label & _MASK64)
        state = _mix64(state ^ token)
    return state


class RandomStream:
    """splitmix64 generator with just the draw kinds the simulator needs."""

    __slots__ = ("_state",)

    def __init__(self, seed: int):
        self._state = seed & _MASK64

    def u64(self) -> int:
        self._state = (self._state + _GAMMA) & _MASK64
        return _mix64(self._state)

    def uniform(self) -> float:
        # 53-bit mantissa, value in [0, 1)
        return (self.u64() >> 11) * (2.0 ** -53)

    def uniform_in(self, lo: float, hi: float) -> float:
        return lo + (hi - lo) * self.uniform()

    def randrange(self, n: int) -> int:
        if n <= 0:
            raise ValueError("randrange needs n > 0")
        v = int(self.uniform() * n)
        return n - 1 if v >= n else v

    def shuffle(self, items: list) -> None:
        for i in range(len(items) - 1, 0, -1):
            j = self.randrange(i + 1)
            items[i], items[j] = items[j], items[i]

    def sample_ids(self, ids: list[int], k: int) -> list[int]:
        pool = sorted(ids)
        self.shuffle(pool)
        return sorted(pool[:k])
