"""Deterministic RNG streams.

Every stochastic subsystem draws from its own counter-based stream keyed by
(run seed, subsystem tag, indices).  Parallel workers therefore cannot perturb
results: a stream's output depends only on its key, never on scheduling.
"""
from __future__ import annotations

import numpy as np

# Subsystem tags used as the first spawn-key element.
SEED_GENOMES = 0
SEED_EVAL = 1
EMITTER = 2
VARIATION = 3
CORRECTION = 4
REEVAL = 5


def stream(seed: int, *path: int) -> np.random.Generator:
    """Return the generator for the stream identified by (seed, *path)."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=tuple(path)))
