"""Deterministic xorshift64* generator shared by Python code and the numba kernels.

The state lives in a one-element uint64 numpy array so the same stream can be
consumed alternately from Python and from jitted kernels without divergence.
"""
from __future__ import annotations

import numpy as np

_MASK = (1 << 64) - 1
_MULT = 0x2545F4914F6CDD1D
_TWO53 = float(1 << 53)


def _splitmix64(z: int) -> int:
    z = (z + 0x9E3779B97F4A7C15) & _MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return z ^ (z >> 31)


def seed_state(seed: int) -> np.ndarray:
    """Build a fresh RNG state array from an integer seed."""
    s = _splitmix64(seed & _MASK)
    if s == 0:
        s = 0x9E3779B97F4A7C15
    return np.array([s], dtype=np.uint64)


class Rng:
    """Seedable generator; mirrors the in-kernel arithmetic bit for bit."""

    def __init__(self, seed: int = 0):
        self.state = seed_state(seed)

    def next_u64(self) -> int:
        x = int(self.state[0])
        x ^= x >> 12
        x = (x ^ (x << 25)) & _MASK
        x ^= x >> 27
        self.state[0] = x
        return (x * _MULT) & _MASK

    def uniform(self) -> float:
        """Uniform float in [0, 1)."""
        return (self.next_u64() >> 11) / _TWO53

    def below(self, n: int) -> int:
        """Uniform integer in [0, n)."""
        return int(self.uniform() * n)

    def copy(self) -> "Rng":
        r = Rng.__new__(Rng)
        r.state = self.state.copy()
        return r
