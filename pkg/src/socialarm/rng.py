"""Deterministic RNG streams derived from a scenario seed.

Each subsystem gets its own stream keyed by a fixed label, so adding a
consumer of randomness to one subsystem never perturbs the draw sequence
of another. Python's Mersenne Twister is stable across platforms and
versions, which the replay-determinism guarantees rely on.
"""

from __future__ import annotations

import random
import zlib


def stream(seed: int, label: str) -> random.Random:
    """Independent RNG stream for `label`, derived from the base seed."""
    # zlib.crc32 is a stable hash; never use built-in hash() here, it is
    # randomized per process.
    crc = zlib.crc32(label.encode("utf-8")) & 0xFFFFFFFF
    return random.Random((int(seed) & 0xFFFFFFFF) ^ crc)
