"""Seed handling shared by every module."""

from __future__ import annotations

import numpy as np


def as_generator(seed=None) -> np.random.Generator:
    """Accept an int, SeedSequence, Generator or None and return a Generator."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def child_seeds(root_seed: int, *key: int) -> np.random.SeedSequence:
    """Derive an independent stream for a job.

    The split rule is ``SeedSequence(root_seed, spawn_key=key)``, so a job's
    stream depends only on the root seed and its own key tuple, never on
    how many jobs run or in which order.
    """
    return np.random.SeedSequence(int(root_seed), spawn_key=tuple(int(k) for k in key))
