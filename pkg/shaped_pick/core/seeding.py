"""Derivation of independent random streams from a run seed."""

from __future__ import annotations

import numpy as np

STREAM_INIT = 0
STREAM_ROLLOUT = 1
STREAM_RELABEL = 2
STREAM_SAMPLE = 3
STREAM_EVAL = 4


def derive_rng(seed: int, *keys: int) -> np.random.Generator:
    """Return a generator keyed by ``(seed, *keys)``.

    Streams for different key tuples are statistically independent, and the
    same tuple always yields the same stream regardless of call order.
    """

    if seed < 0 or any(key < 0 for key in keys):
        raise ValueError("seed and stream keys must be non-negative")
    return np.random.default_rng(np.random.SeedSequence([seed, *keys]))
