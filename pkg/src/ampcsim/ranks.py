"""Seeded 64-bit hashing used for ranks, priorities, coins and machine assignment.

Every random choice in the package is a pure function of (seed, stream, id) so
that replays are bit-identical regardless of execution order.
"""
from __future__ import annotations

import numpy as np

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_TWO64 = float(2**64)

# stream tags keep independent uses of one seed uncorrelated
VERTEX_RANK = 1
EDGE_RANK = 2
MACHINE = 3
EDGE_SAMPLE = 4
VERTEX_SAMPLE = 5
COLOR = 6


def mix64(x: np.ndarray) -> np.ndarray:
    """splitmix64 finalizer over a uint64 array (wrapping arithmetic)."""
    z = np.asarray(x, dtype=np.uint64) + _GOLDEN
    z = (z ^ (z >> np.uint64(30))) * _M1
    z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


def hash64(seed: int, stream: int, ids, salt: int = 0) -> np.ndarray:
    ids = np.asarray(ids, dtype=np.int64).astype(np.uint64)
    with np.errstate(over="ignore"):
        key = mix64(np.array([seed & 0xFFFFFFFFFFFFFFFF], dtype=np.uint64))
        key = mix64(key ^ np.uint64(stream) ^ (np.uint64(salt & 0xFFFFFFFF) << np.uint64(32)))
        return mix64(ids ^ key[0])


def uniform(seed: int, stream: int, ids, salt: int = 0) -> np.ndarray:
    """Map hashed ids into [0, 1) (the 64-bit rank divided by 2**64)."""
    return hash64(seed, stream, ids, salt).astype(np.float64) / _TWO64


def coin(seed: int, stream: int, ids, p: float, salt: int = 0) -> np.ndarray:
    if p >= 1.0:
        return np.ones(len(np.asarray(ids)), dtype=bool)
    return uniform(seed, stream, ids, salt) < p


def priorities(rank: np.ndarray) -> np.ndarray:
    """Dense positions 0..k-1 of items in (rank, id) order.

    Smaller position means lower rank, i.e. earlier in the greedy permutation.
    """
    k = len(rank)
    order = np.lexsort((np.arange(k), rank))
    pos = np.empty(k, dtype=np.int64)
    pos[order] = np.arange(k, dtype=np.int64)
    return pos


def vertex_ranks(n: int, seed: int) -> np.ndarray:
    return hash64(seed, VERTEX_RANK, np.arange(n))


def edge_ranks(eids, seed: int) -> np.ndarray:
    return hash64(seed, EDGE_RANK, eids)
