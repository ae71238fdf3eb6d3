"""Counter-based random draws keyed by a seed and a genealogy label.

Every fragment owns a 64-bit key derived from the master seed by walking its
label bit by bit.  Its split clock, feet and child-ordering coin are pure
functions of that key, so two runs that reach the same fragment draw the same
numbers no matter which other fragments were simulated.
"""

from __future__ import annotations

import hashlib
import math

M64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
_ROOT_SALT = 0x5851F42D4C957F2D
_CHILD_SALT = 0xD1B54A32D192ED03
_TO_UNIT = 1.0 / 9007199254740992.0

# draw slots used by each fragment
CLOCK, FOOT_A, FOOT_B, COIN = 0, 1, 2, 3
# redraws of degenerate feet start here
RETRY = 8


def mix64(z: int) -> int:
    """splitmix64 finalizer."""
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & M64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & M64
    return z ^ (z >> 31)


def root_key(seed: int) -> int:
    return mix64((seed & M64) ^ _ROOT_SALT)


def child_key(key: int, bit: int) -> int:
    return mix64(key ^ ((_CHILD_SALT * (bit + 1)) & M64))


def label_key(seed: int, label: str) -> int:
    key = root_key(seed)
    for ch in label:
        key = child_key(key, 1 if ch == "1" else 0)
    return key


def uniform(key: int, counter: int) -> float:
    """Uniform on [0, 1) with 53 random bits."""
    z = (key + GOLDEN * (counter + 1)) & M64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & M64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & M64
    return ((z ^ (z >> 31)) >> 11) * _TO_UNIT


def exponential(key: int, counter: int) -> float:
    return -math.log1p(-uniform(key, counter))


def stream_key(seed: int, name: str) -> int:
    """Key for an auxiliary stream that never collides with fragment keys."""
    h = int.from_bytes(hashlib.blake2b(name.encode(), digest_size=8).digest(), "little")
    return mix64(root_key(seed) ^ h ^ GOLDEN)


class KeyedStream:
    """Sequential draws from one key, for auxiliary randomness."""

    def __init__(self, key: int):
        self.key = key
        self.counter = 0

    @classmethod
    def named(cls, seed: int, name: str) -> "KeyedStream":
        return cls(stream_key(seed, name))

    def random(self) -> float:
        u = uniform(self.key, self.counter)
        self.counter += 1
        return u

    def exponential(self) -> float:
        return -math.log1p(-self.random())
