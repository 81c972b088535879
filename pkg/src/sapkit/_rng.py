"""Named, reproducible random streams.

A stream is identified by a base seed plus any hashable-by-repr key (a box
descriptor, a block id and W index, ...).  The same key always yields the same
bits, independent of call order.
"""

from __future__ import annotations

import hashlib

import numpy as np


def _key_words(key: object) -> list[int]:
    digest = hashlib.blake2b(repr(key).encode("utf-8"), digest_size=16).digest()
    return [int.from_bytes(digest[i:i + 4], "little") for i in range(0, 16, 4)]


def stream(seed: int, *key: object) -> np.random.Generator:
    return np.random.default_rng([int(seed) & 0xFFFFFFFF, *_key_words(key)])
