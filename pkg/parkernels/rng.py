"""
Seeded generator: splitmix64 seeding a xoshiro256** stream.

Scalar seeding and seed splitting are plain Python integer arithmetic masked
to 64 bits; the stream itself runs inside numba kernels so bulk draws and the
Random pivot strategy share one bit-exact implementation.
"""

import numba
import numpy as np

from parkernels.errors import InvalidRangeError

MASK64 = (1 << 64) - 1
INT64_MIN = -(1 << 63)
INT64_MAX = (1 << 63) - 1

_GOLDEN = 0x9E3779B97F4A7C15
_MIX_A = 0xBF58476D1CE4E5B9
_MIX_B = 0x94D049BB133111EB

# Kernel constants; numba freezes module globals, so keep them uint64-typed.
_U0 = np.uint64(0)
_U5 = np.uint64(5)
_U7 = np.uint64(7)
_U9 = np.uint64(9)
_U11 = np.uint64(11)
_U17 = np.uint64(17)
_U45 = np.uint64(45)
_U64 = np.uint64(64)
_TWO_NEG_53 = 2.0 ** -53


def _mix(z: int) -> int:
    z = ((z ^ (z >> 30)) * _MIX_A) & MASK64
    z = ((z ^ (z >> 27)) * _MIX_B) & MASK64
    return z ^ (z >> 31)


def splitmix64(x: int) -> int:
    """One splitmix64 output for state ``x``."""
    return _mix((x + _GOLDEN) & MASK64)


def derive_seed(seed: int, n: int) -> int:
    """Per-size workload seed, so every size gets its own stream."""
    return splitmix64((seed ^ n) & MASK64)


def seed_state(seed: int) -> np.ndarray:
    """The four successive splitmix64 outputs from ``seed``, as xoshiro state."""
    state = np.empty(4, dtype=np.uint64)
    x = seed & MASK64
    for i in range(4):
        state[i] = splitmix64(x)
        x = (x + _GOLDEN) & MASK64
    return state


@numba.njit(nogil=True, cache=True)
def _rotl(x, k):
    return (x << k) | (x >> (_U64 - k))


@numba.njit(nogil=True, cache=True)
def next_u64(state):
    s0 = state[0]
    s1 = state[1]
    s2 = state[2]
    s3 = state[3]
    result = _rotl(s1 * _U5, _U7) * _U9
    t = s1 << _U17
    s2 ^= s0
    s3 ^= s1
    s1 ^= s2
    s0 ^= s3
    s2 ^= t
    s3 = _rotl(s3, _U45)
    state[0] = s0
    state[1] = s1
    state[2] = s2
    state[3] = s3
    return result


@numba.njit(nogil=True, cache=True)
def bounded_int(state, lo, span):
    # span == 0 stands for the full 2**64 range.
    x = next_u64(state)
    if span != _U0:
        x = x % span
    return np.int64(np.uint64(lo) + x)


@numba.njit(nogil=True, cache=True)
def fill_uniform_int(state, out, lo, span):
    for i in range(out.shape[0]):
        out[i] = bounded_int(state, lo, span)


@numba.njit(nogil=True, cache=True)
def fill_uniform_float(state, out, lo, width):
    for i in range(out.shape[0]):
        out[i] = lo + width * (np.float64(next_u64(state) >> _U11) * _TWO_NEG_53)


def int_span(lo: int, hi: int) -> np.uint64:
    """Number of values in [lo, hi] modulo 2**64, validated against int64 bounds."""
    if lo > hi:
        raise InvalidRangeError(f"Invalid range: lo={lo} is greater than hi={hi}.")
    if lo < INT64_MIN or hi > INT64_MAX:
        raise InvalidRangeError(f"Range [{lo}, {hi}] exceeds 64-bit signed integers.")
    return np.uint64((hi - lo + 1) & MASK64)


class SeededGenerator:
    """Explicit generator state threaded through the sort kernels.

    ``split`` derives a child for a forked task from the parent's seed and the
    task's range start, so Random-pivot runs are reproducible no matter how
    the threads are scheduled.
    """

    def __init__(self, seed: int):
        self.seed = seed & MASK64
        self.state = seed_state(self.seed)

    def next_u64(self) -> int:
        return int(next_u64(self.state))

    def randint(self, lo: int, hi: int) -> int:
        return int(bounded_int(self.state, np.int64(lo), int_span(lo, hi)))

    def split(self, range_begin: int) -> "SeededGenerator":
        return SeededGenerator(splitmix64(self.seed ^ (range_begin & MASK64)))

    def __repr__(self) -> str:
        return f"SeededGenerator(seed={self.seed})"
