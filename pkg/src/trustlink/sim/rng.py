"""Counter-based random numbers: every draw is a pure function of its coordinates.

A uniform is addressed by (seed, episode, round, stream). Because nothing
is carried between draws, episodes can be evaluated in any order, in any
batch shape and on any number of processes with identical results.
The mixing function is the SplitMix64 finaliser.
"""

from __future__ import annotations

import numpy as np

MASK = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
_M1 = 0xBF58476D1CE4E5B9
_M2 = 0x94D049BB133111EB

LOSS = 0
CONTINUE = 1
SERVICE = 2
_STREAMS = 3


def mix(z: int) -> int:
    z &= MASK
    z = ((z ^ (z >> 30)) * _M1) & MASK
    z = ((z ^ (z >> 27)) * _M2) & MASK
    return z ^ (z >> 31)


def episode_key(seed: int, episode: int) -> int:
    return mix(mix(seed + GOLDEN) ^ mix(episode + 2 * GOLDEN))


def uniform(key: int, rnd: int, stream: int) -> float:
    """Uniform on [0, 1) with 53 random bits."""
    h = mix(key + (_STREAMS * rnd + stream + 1) * GOLDEN)
    return (h >> 11) * 2.0**-53


_U30, _U27, _U31, _U11 = (np.uint64(k) for k in (30, 27, 31, 11))
_NM1, _NM2, _NG = np.uint64(_M1), np.uint64(_M2), np.uint64(GOLDEN)


def mix_array(z: np.ndarray) -> np.ndarray:
    z = (z ^ (z >> _U30)) * _NM1
    z = (z ^ (z >> _U27)) * _NM2
    return z ^ (z >> _U31)


def episode_keys(seed: int, episodes: np.ndarray) -> np.ndarray:
    base = np.uint64(mix(seed + GOLDEN))
    e = episodes.astype(np.uint64) + np.uint64((2 * GOLDEN) & MASK)
    return mix_array(base ^ mix_array(e))


def uniform_array(keys: np.ndarray, rnd: int, stream: int) -> np.ndarray:
    offset = np.uint64(((_STREAMS * rnd + stream + 1) * GOLDEN) & MASK)
    h = mix_array(keys + offset)
    return (h >> _U11).astype(np.float64) * 2.0**-53
