"""Deterministic 64-bit mixing primitives.

The keyed trait permutation and the experiment harness both need integer
streams that are bit-exact across platforms and interpreter versions, so the
mixers are spelled out here instead of delegating to ``random``. All
arithmetic is modulo 2**64.
"""

from __future__ import annotations

MASK64 = (1 << 64) - 1

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3

_GAMMA = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB


def fnv1a64(data: bytes) -> int:
    """FNV-1a hash of ``data``, 64-bit variant."""
    h = _FNV_OFFSET
    for byte in data:
        h ^= byte
        h = (h * _FNV_PRIME) & MASK64
    return h


def splitmix64(state: int) -> tuple[int, int]:
    """Advance a splitmix64 state once; returns ``(new_state, output)``."""
    state = (state + _GAMMA) & MASK64
    z = state
    z = ((z ^ (z >> 30)) * _MIX1) & MASK64
    z = ((z ^ (z >> 27)) * _MIX2) & MASK64
    return state, z ^ (z >> 31)


class SplitMix64:
    """Tiny deterministic stream over :func:`splitmix64` outputs."""

    def __init__(self, seed: int):
        self._state = seed & MASK64

    def next_uint64(self) -> int:
        self._state, out = splitmix64(self._state)
        return out

    def below(self, bound: int) -> int:
        """Next value reduced modulo ``bound`` (bias < bound / 2**64)."""
        if bound <= 0:
            raise ValueError("bound must be positive")
        return self.next_uint64() % bound


def derive_seed(master_seed: int, label: str) -> int:
    """Stable 64-bit sub-seed for ``label`` under ``master_seed``.

    Used to hand independent, reproducible seeds to every replication and
    every randomized stage inside it.
    """
    _, out = splitmix64((master_seed & MASK64) ^ fnv1a64(label.encode("utf-8")))
    return out
