"""Deterministic seed derivation for parallel Monte Carlo runs.

Every simulation point owns an independent generator whose seed is a pure
function of the base seed and the point coordinates.  Results are therefore
identical for any execution order or worker count.
"""

import numpy as np

_MASK64 = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15


def splitmix64(state: int) -> int:
    """One splitmix64 step: maps a 64-bit state to a well-mixed 64-bit value."""
    z = (state + _GAMMA) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return (z ^ (z >> 31)) & _MASK64


def derive_seed(base: int, *coords: int) -> int:
    """Fold integer coordinates into a base seed, one splitmix step per word."""
    state = splitmix64(int(base) & _MASK64)
    for c in coords:
        state = splitmix64(state ^ (int(c) & _MASK64))
    return state


def make_rng(base: int, *coords: int) -> np.random.Generator:
    """Generator for the point identified by ``coords`` under ``base`` seed."""
    return np.random.Generator(np.random.SFC64(derive_seed(base, *coords)))
