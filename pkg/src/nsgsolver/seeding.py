"""Named RNG sub-streams.

All randomness in a run flows from one integer seed; components draw from
independent streams keyed by name (e.g. "episode:1234") so any piece of the
pipeline is reproducible in isolation and results do not depend on scheduling.
"""

from __future__ import annotations

import hashlib

import numpy as np

__all__ = ["substream", "substream_seed"]


def _digest_words(seed: int, name: str) -> list:
    digest = hashlib.sha256(f"{seed}:{name}".encode("utf-8")).digest()
    return [int.from_bytes(digest[i : i + 4], "little") for i in range(0, 16, 4)]


def substream(seed: int, name: str) -> np.random.Generator:
    """Independent generator for (seed, name)."""
    return np.random.default_rng(np.random.SeedSequence(_digest_words(seed, name)))


def substream_seed(seed: int, name: str) -> int:
    """Derived integer seed, for APIs that take a seed rather than a generator."""
    return _digest_words(seed, name)[0]
