"""Named random substreams derived from one master seed.

Each concern (workload, adversary, policy, greedy search, ...) gets its own
generator, so changing how much randomness one of them consumes never shifts
the draws of another.
"""
from __future__ import annotations

import zlib

import numpy as np


def substream(seed: int, label: str, *extra: int) -> np.random.Generator:
    key = (zlib.crc32(label.encode("utf-8")),) + tuple(int(e) for e in extra)
    return np.random.default_rng(np.random.SeedSequence(entropy=int(seed), spawn_key=key))


def derive_seed(seed: int, label: str, *extra: int) -> int:
    """A 63-bit integer seed, deterministic in ``(seed, label, *extra)``."""
    return int(substream(seed, label, *extra).integers(0, 2**63 - 1))
