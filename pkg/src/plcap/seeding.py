"""Deterministic per-component random streams from one global seed.

Every randomised routine derives its own generator as
``spawn_rng(seed, "component", index, ...)``.  The key parts are mapped
to a ``numpy.random.SeedSequence`` spawn key (strings via CRC-32), so
streams are independent, reproducible, and insensitive to the order in
which components consume randomness.
"""

from __future__ import annotations

import zlib

import numpy as np


class SeedRequiredError(ValueError):
    """Raised when a randomised code path is reached without a seed."""


def _key_part(part) -> int:
    if isinstance(part, str):
        return zlib.crc32(part.encode("utf-8"))
    return int(part)


def spawn_rng(seed: int | None, *key) -> np.random.Generator:
    """Generator for the stream identified by ``key`` under ``seed``."""
    if seed is None:
        raise SeedRequiredError(
            "a seed is required for randomised components (pass seed=...)"
        )
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(_key_part(k) for k in key))
    return np.random.default_rng(ss)
