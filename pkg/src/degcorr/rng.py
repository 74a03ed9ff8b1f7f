"""Seed derivation.

Every random draw in the package comes from a Philox (counter-based) generator
whose key is derived from a user seed and a tuple of purpose tags through the
SplitMix64 finaliser. Streams for different purposes never share state, so
results do not depend on evaluation order or worker scheduling.
"""

from __future__ import annotations

import hashlib

import numpy as np

MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def splitmix64(x: int) -> int:
    """SplitMix64 finaliser applied to a 64-bit integer."""
    z = (x + _GOLDEN) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def _tag_value(tag: int | str) -> int:
    if isinstance(tag, str):
        return int.from_bytes(hashlib.blake2b(tag.encode(), digest_size=8).digest(), "little")
    return int(tag) & MASK64


def mix(seed: int, *tags: int | str) -> int:
    """Fold ``tags`` into ``seed``; deterministic and order sensitive."""
    h = splitmix64(int(seed) & MASK64)
    for tag in tags:
        h = splitmix64(h ^ _tag_value(tag))
    return h


def stream(seed: int, *tags: int | str) -> np.random.Generator:
    """A fresh generator for the purpose identified by ``tags``."""
    return np.random.Generator(np.random.Philox(key=mix(seed, *tags)))
