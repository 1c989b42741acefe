"""Inline SplitMix64 generator for the compiled kernels.

The kernels draw hundreds of millions of variates; calling numba's global
``np.random`` costs roughly ten times more per draw than this generator. A
state is a length-1 ``uint64`` array, seeded from a numpy ``Generator`` so
every stream still descends from the caller's seed.
"""

import numpy as np
from numba import njit, uint64

_GOLDEN = uint64(0x9E3779B97F4A7C15)
_M1 = uint64(0xBF58476D1CE4E5B9)
_M2 = uint64(0x94D049BB133111EB)
_INV53 = 1.0 / 9007199254740992.0


def new_state(rng: np.random.Generator) -> np.ndarray:
    return np.array([rng.integers(0, 2**64, dtype=np.uint64)], dtype=np.uint64)


@njit(cache=True, inline="always")
def next_u64(state):
    z = state[0] + _GOLDEN
    state[0] = z
    z = (z ^ (z >> uint64(30))) * _M1
    z = (z ^ (z >> uint64(27))) * _M2
    return z ^ (z >> uint64(31))


@njit(cache=True, inline="always")
def next_double(state):
    """Uniform on [0, 1) with 53 random bits."""
    return float(next_u64(state) >> uint64(11)) * _INV53


@njit(cache=True, inline="always")
def bounded(x32, n):
    """Map 32 random bits to ``0..n-1`` by multiply-shift."""
    return np.int64((x32 * uint64(n)) >> uint64(32))
