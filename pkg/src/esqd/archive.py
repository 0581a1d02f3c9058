"""Grid archive of elites over a discretized feature space.

The archive keeps at most one occupant per grid cell; a candidate replaces the
incumbent only when its fitness is strictly higher.  Out-of-bounds features are
clamped into the nearest edge cell, non-finite candidates are rejected and
counted.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class BoundedBox:
    """Axis-aligned box with low[i] < high[i] on every axis."""

    low: np.ndarray
    high: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "low", np.asarray(self.low, dtype=float))
        object.__setattr__(self, "high", np.asarray(self.high, dtype=float))
        if self.low.shape != self.high.shape or self.low.ndim != 1:
            raise ValueError("low/high must be 1-D vectors of equal length")
        if not np.all(self.low < self.high):
            raise ValueError("low must be strictly below high on every axis")

    @property
    def dim(self) -> int:
        return self.low.size

    def sample_uniform(self, rng: np.random.Generator, count: int) -> np.ndarray:
        return rng.uniform(self.low, self.high, size=(count, self.dim))

    def clip(self, points: np.ndarray) -> np.ndarray:
        return np.clip(points, self.low, self.high)


@dataclass(frozen=True)
class GridSpec:
    """Equally spaced discretization of a bounded feature space."""

    bounds: BoundedBox
    cells_per_dim: np.ndarray

    def __post_init__(self):
        object.__setattr__(
            self, "cells_per_dim", np.asarray(self.cells_per_dim, dtype=int)
        )
        if self.cells_per_dim.shape != (self.bounds.dim,):
            raise ValueError("cells_per_dim must match bounds dimensionality")
        if not np.all(self.cells_per_dim > 0):
            raise ValueError("cells_per_dim must be positive")

    @property
    def dim(self) -> int:
        return self.bounds.dim

    @property
    def total_cells(self) -> int:
        return int(np.prod(self.cells_per_dim))

    @property
    def cell_widths(self) -> np.ndarray:
        return (self.bounds.high - self.bounds.low) / self.cells_per_dim

    def cell_index(self, feature: np.ndarray) -> np.ndarray:
        """Multi-dim cell index of one feature vector; clamps at the bounds."""
        feature = np.asarray(feature, dtype=float)
        if feature.shape != (self.dim,):
            raise ValueError(
                f"feature has shape {feature.shape}, expected ({self.dim},)"
            )
        if not np.all(np.isfinite(feature)):
            raise ValueError("non-finite feature")
        return self.cell_indices(feature[None, :])[0]

    def cell_indices(self, features: np.ndarray) -> np.ndarray:
        """Vectorized cell_index over rows; caller guarantees finiteness."""
        rel = (features - self.bounds.low) / self.cell_widths
        idx = np.floor(rel).astype(int)
        return np.clip(idx, 0, self.cells_per_dim - 1)

    def flat_index(self, index: np.ndarray) -> int:
        return int(np.ravel_multi_index(tuple(index), tuple(self.cells_per_dim)))

    def unflatten(self, flat: int) -> np.ndarray:
        return np.array(np.unravel_index(flat, tuple(self.cells_per_dim)))


@dataclass(frozen=True)
class Evaluation:
    """Fitness and feature of one genome on a task."""

    fitness: float
    feature: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "feature", np.asarray(self.feature, dtype=float))

    @property
    def finite(self) -> bool:
        return bool(
            np.isfinite(self.fitness) and np.all(np.isfinite(self.feature))
        )


@dataclass
class Elite:
    genome: np.ndarray
    fitness: float
    feature: np.ndarray


class EliteArchive:
    """MAP-Elites container: one best-so-far occupant per grid cell."""

    def __init__(self, spec: GridSpec):
        self.spec = spec
        self._cells: dict[int, Elite] = {}
        self.invalid_count = 0

    def __len__(self) -> int:
        return len(self._cells)

    @property
    def occupied_cells(self) -> int:
        return len(self._cells)

    def items(self) -> list[tuple[int, Elite]]:
        """Occupied cells in canonical (flat index) order."""
        return sorted(self._cells.items())

    def elites(self) -> list[Elite]:
        return [e for _, e in self.items()]

    def features(self) -> np.ndarray:
        """(m, dim) array of occupant features in canonical order."""
        items = self.items()
        if not items:
            return np.empty((0, self.spec.dim))
        return np.stack([e.feature for _, e in items])

    def fitnesses(self) -> np.ndarray:
        return np.array([e.fitness for _, e in self.items()])

    def try_add(self, genome: np.ndarray, evaluation: Evaluation) -> bool:
        if not evaluation.finite:
            self.invalid_count += 1
            return False
        flat = self.spec.flat_index(self.spec.cell_index(evaluation.feature))
        incumbent = self._cells.get(flat)
        if incumbent is not None and evaluation.fitness <= incumbent.fitness:
            return False
        self._cells[flat] = Elite(
            genome=np.array(genome, dtype=float, copy=True),
            fitness=float(evaluation.fitness),
            feature=np.array(evaluation.feature, dtype=float, copy=True),
        )
        return True

    def try_add_batch(
        self, genomes: np.ndarray, fitnesses: np.ndarray, features: np.ndarray
    ) -> np.ndarray:
        """Offer candidates in row order; returns per-row added flags."""
        added = np.zeros(len(genomes), dtype=bool)
        for i in range(len(genomes)):
            added[i] = self.try_add(
                genomes[i], Evaluation(float(fitnesses[i]), features[i])
            )
        return added

    def select_entries(self, rng: np.random.Generator, count: int) -> list[Elite]:
        """Draw occupants i.i.d. uniformly (with replacement)."""
        items = self.items()
        if not items:
            raise ValueError("cannot select from an empty archive; seed it first")
        picks = rng.integers(0, len(items), size=count)
        return [items[int(p)][1] for p in picks]

    def uniform_select(self, rng: np.random.Generator, count: int) -> list[np.ndarray]:
        return [e.genome for e in self.select_entries(rng, count)]

    # -- serialization (self-describing JSON, bit-exact float round-trip) --

    def to_dict(self) -> dict:
        return {
            "grid": {
                "low": self.spec.bounds.low.tolist(),
                "high": self.spec.bounds.high.tolist(),
                "cells_per_dim": self.spec.cells_per_dim.tolist(),
            },
            "cells": [
                {
                    "index": self.spec.unflatten(flat).tolist(),
                    "genome": e.genome.tolist(),
                    "fitness": e.fitness,
                    "feature": e.feature.tolist(),
                }
                for flat, e in self.items()
            ],
        }

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as f:
            json.dump(self.to_dict(), f, indent=1)

    @classmethod
    def from_dict(cls, data: dict) -> "EliteArchive":
        grid = data["grid"]
        spec = GridSpec(
            bounds=BoundedBox(np.array(grid["low"]), np.array(grid["high"])),
            cells_per_dim=np.array(grid["cells_per_dim"]),
        )
        archive = cls(spec)
        for cell in data["cells"]:
            flat = spec.flat_index(np.array(cell["index"]))
            archive._cells[flat] = Elite(
                genome=np.array(cell["genome"], dtype=float),
                fitness=float(cell["fitness"]),
                feature=np.array(cell["feature"], dtype=float),
            )
        return archive

    @classmethod
    def load(cls, path) -> "EliteArchive":
        with open(path, encoding="utf-8") as f:
            return cls.from_dict(json.load(f))
