"""Novelty scoring against interchangeable feature stores.

Backends: "fifo" (bounded, evicts oldest), "all" (unbounded), "elites"
(K-NN over the elite archive's occupant features), "ga" (no store; explore
emitters fall back to random variation), "none".
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

from .archive import EliteArchive

BACKENDS = ("fifo", "all", "elites", "ga", "none")

# Returned for queries against an empty store: everything is maximally novel.
EMPTY_STORE_NOVELTY = 1e6


@dataclass(frozen=True)
class NoveltyConfig:
    k_nearest: int = 10
    fifo_capacity: int = 50_000
    backend: str = "fifo"
    # When True, all evaluated ES samples enter the store each generation in
    # addition to the emitter offspring means.
    include_samples: bool = False

    def __post_init__(self):
        if self.k_nearest < 1:
            raise ValueError("k_nearest must be >= 1")
        if self.fifo_capacity < self.k_nearest:
            raise ValueError("fifo_capacity must be >= k_nearest")
        if self.backend not in BACKENDS:
            raise ValueError(f"unknown novelty backend {self.backend!r}")


class NoveltyArchive:
    """Ordered feature store; FIFO eviction when bounded."""

    def __init__(self, capacity: int | None = None):
        self._features: deque[np.ndarray] = deque(maxlen=capacity)
        self.total_inserted = 0

    @classmethod
    def for_config(cls, cfg: NoveltyConfig) -> "NoveltyArchive":
        if cfg.backend == "fifo":
            return cls(capacity=cfg.fifo_capacity)
        return cls(capacity=None)  # "all"; unused for elites/ga/none

    def __len__(self) -> int:
        return len(self._features)

    def insert(self, features: np.ndarray) -> None:
        """Append feature rows in the given canonical order."""
        features = np.atleast_2d(np.asarray(features, dtype=float))
        if self._features and features.shape[1] != self._features[0].size:
            raise ValueError("feature dimensionality mismatch")
        for row in features:
            self._features.append(np.array(row, copy=True))
        self.total_inserted += len(features)

    def snapshot(self) -> np.ndarray:
        """(m, dim) array of stored features, oldest first."""
        if not self._features:
            return np.empty((0, 0))
        return np.stack(list(self._features))


def novelty_scores(queries: np.ndarray, stored: np.ndarray, k: int) -> np.ndarray:
    """Mean Euclidean distance from each query row to its k nearest stored
    features.  Stores smaller than k average over everything they hold; an
    empty store returns the maximal-novelty sentinel."""
    queries = np.atleast_2d(np.asarray(queries, dtype=float))
    if stored.size == 0:
        return np.full(len(queries), EMPTY_STORE_NOVELTY)
    dists = cdist(queries, stored)
    kk = min(k, stored.shape[0])
    # sort the selected distances so the mean sums in a canonical order
    nearest = np.sort(np.partition(dists, kk - 1, axis=1)[:, :kk], axis=1)
    return nearest.mean(axis=1)


def novelty_score(query: np.ndarray, store, k: int) -> float:
    """Single-query convenience over a NoveltyArchive or EliteArchive."""
    stored = store.features() if isinstance(store, EliteArchive) else store.snapshot()
    return float(novelty_scores(np.asarray(query)[None, :], stored, k)[0])
