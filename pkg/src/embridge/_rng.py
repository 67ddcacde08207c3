"""Self-contained deterministic RNG primitives.

Walk generation and embedding training need random streams that are
bit-reproducible across runs, platforms, and worker counts. Relying on a
single global generator would make the output depend on scheduling, so
instead every unit of work (a walk, a document, a training run) derives
its own stream seed with splitmix64-style mixing and then draws from an
xorshift64* generator. All functions here are numba-compiled and safe to
call both from Python and from inside other jitted kernels.
"""

from __future__ import annotations

import numpy as np
from numba import njit, types

U64 = np.uint64

_GAMMA = U64(0x9E3779B97F4A7C15)
_MIX_A = U64(0xBF58476D1CE4E5B9)
_MIX_B = U64(0x94D049BB133111EB)
_STAR = U64(0x2545F4914F6CDD1D)
_INV_2_53 = 1.0 / 9007199254740992.0  # 2**-53


@njit(types.uint64(types.uint64), cache=True)
def mix64(z):
    """splitmix64 finalizer: a strong avalanche permutation of u64."""
    z = (z ^ (z >> U64(30))) * _MIX_A
    z = (z ^ (z >> U64(27))) * _MIX_B
    return z ^ (z >> U64(31))


@njit(types.uint64(types.uint64, types.uint64), cache=True)
def derive2(base, part):
    """Derive a child seed from a base seed and one stream label."""
    h = mix64(base + _GAMMA)
    return mix64(h ^ (part + _GAMMA))


@njit(types.uint64(types.uint64, types.uint64, types.uint64), cache=True)
def derive3(base, part_a, part_b):
    """Derive a child seed from a base seed and two stream labels."""
    h = mix64(base + _GAMMA)
    h = mix64(h ^ (part_a + _GAMMA))
    return mix64(h ^ (part_b + _GAMMA))


@njit(types.uint64(types.uint64), cache=True)
def xs_init(seed):
    """Turn an arbitrary seed into a valid (nonzero) xorshift64* state."""
    s = mix64(seed + _GAMMA)
    if s == U64(0):
        s = _GAMMA
    return s


@njit(types.UniTuple(types.uint64, 2)(types.uint64), cache=True)
def xs_next(state):
    """Advance xorshift64* once; returns (new_state, output)."""
    s = state
    s ^= s >> U64(12)
    s ^= s << U64(25)
    s ^= s >> U64(27)
    return s, s * _STAR


@njit(types.float64(types.uint64), cache=True)
def to_unit(z):
    """Map a u64 draw to a float64 in [0, 1)."""
    return (z >> U64(11)) * _INV_2_53


@njit(types.UniTuple(types.uint64, 2)(types.uint64, types.uint64), cache=True)
def next_below(state, n):
    """Draw an integer uniformly from [0, n); returns (new_state, value)."""
    s, z = xs_next(state)
    return s, U64(to_unit(z) * n)


def stream_seed(base: int, *parts: int) -> int:
    """Python-side helper chaining derive2 over any number of labels.

    Masked to 63 bits so the result stays a valid non-negative seed for
    config fields typed as plain integers.
    """
    h = U64(base & 0xFFFFFFFFFFFFFFFF)
    for part in parts:
        h = derive2(h, U64(part & 0xFFFFFFFFFFFFFFFF))
    return int(h) & 0x7FFFFFFFFFFFFFFF
