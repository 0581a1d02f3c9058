"""Archive and run scoring: QD-score / coverage / max-fitness, corrected
metrics under uncertain evaluation, archive-loss percentages, parent-offspring
feature distances and emitter lifespan statistics."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import rng as rngmod
from .archive import EliteArchive, Evaluation, GridSpec
from .emitters import EXPLOIT, GenerationRecord
from .tasks import Task, reevaluate


@dataclass(frozen=True)
class ArchiveMetrics:
    qd_score: float
    coverage: float
    max_fitness: float
    occupied_cells: int

    def as_dict(self) -> dict:
        return {
            "qd_score": self.qd_score,
            "coverage": self.coverage,
            "max_fitness": self.max_fitness,
            "occupied_cells": self.occupied_cells,
        }


def archive_metrics(archive: EliteArchive, fitness_offset: float = 0.0) -> ArchiveMetrics:
    """QD-score sums offset-adjusted occupant fitness; the offset is the
    per-task constant making every contribution non-negative.  Max-fitness is
    reported raw."""
    fits = archive.fitnesses()
    if fits.size == 0:
        return ArchiveMetrics(0.0, 0.0, -np.inf, 0)
    return ArchiveMetrics(
        qd_score=float(np.sum(fits + fitness_offset)),
        coverage=fits.size / archive.spec.total_cells,
        max_fitness=float(fits.max()),
        occupied_cells=int(fits.size),
    )


@dataclass(frozen=True)
class CorrectionReport:
    original: ArchiveMetrics
    corrected: ArchiveMetrics
    loss_pct: dict[str, float]

    def as_dict(self) -> dict:
        return {
            "original": self.original.as_dict(),
            "corrected": self.corrected.as_dict(),
            "loss_pct": self.loss_pct,
        }


def _loss_pct(original: float, corrected: float) -> float:
    if not np.isfinite(original) or original <= 0:
        return 0.0
    return 100.0 * (original - corrected) / original


def corrected_archive(
    archive: EliteArchive,
    task: Task,
    m: int = 512,
    seed: int = 0,
    fitness_offset: float | None = None,
) -> tuple[EliteArchive, CorrectionReport]:
    """Re-evaluate every occupant m times and rebuild an empty archive from
    the mean estimates; the report quantifies the metric loss."""
    if fitness_offset is None:
        fitness_offset = task.spec.fitness_offset
    fresh = EliteArchive(archive.spec)
    for i, (_, elite) in enumerate(archive.items()):
        rng = rngmod.stream(seed, rngmod.CORRECTION, i)
        mean_eval, _, _ = reevaluate(task, elite.genome, m, rng)
        fresh.try_add(elite.genome, mean_eval)
    original = archive_metrics(archive, fitness_offset)
    corrected = archive_metrics(fresh, fitness_offset)
    loss = {
        "qd_score": _loss_pct(original.qd_score, corrected.qd_score),
        "coverage": _loss_pct(original.coverage, corrected.coverage),
        "max_fitness": _loss_pct(
            original.max_fitness + fitness_offset,
            corrected.max_fitness + fitness_offset,
        ),
    }
    return fresh, CorrectionReport(original, corrected, loss)


def mean_cell_width(spec: GridSpec) -> float:
    return float(np.mean(spec.cell_widths))


def parent_offspring_distances(
    records: list[GenerationRecord], spec: GridSpec
) -> np.ndarray:
    """Exploit-mode parent-offspring feature distances in cell-width units for
    one generation's records; explore records and records without a parent
    feature are excluded."""
    width = mean_cell_width(spec)
    dists = [
        float(np.linalg.norm(r.offspring_feature - r.parent_feature)) / width
        for r in records
        if r.mode == EXPLOIT and r.parent_feature is not None
    ]
    return np.array(dists)


def parent_offspring_distance(
    reports: list[list[GenerationRecord]], spec: GridSpec
) -> list[dict]:
    """Per-generation median and quartiles of the exploit parent-offspring
    feature distance; generations with no exploit offspring are absent."""
    rows = []
    for records in reports:
        dists = parent_offspring_distances(records, spec)
        if dists.size == 0:
            continue
        rows.append(
            {
                "generation": records[0].generation,
                "median": float(np.median(dists)),
                "q25": float(np.percentile(dists, 25)),
                "q75": float(np.percentile(dists, 75)),
            }
        )
    return rows


def emitter_lifespans(reports: list[list[GenerationRecord]]) -> dict[str, float]:
    """Mean emitter lifespan per mode over completed reset-to-reset episodes;
    episodes still running at the end of the run count at their current
    length."""
    episodes: dict[str, list[int]] = {}
    previous_mode: dict[int, str] = {}
    last_record: dict[int, GenerationRecord] = {}
    for records in reports:
        for r in records:
            if r.completed_episode is not None:
                # the finished episode ran under the emitter's previous mode
                mode = previous_mode.get(r.emitter, r.mode)
                episodes.setdefault(mode, []).append(r.completed_episode)
            previous_mode[r.emitter] = r.mode
            last_record[r.emitter] = r
    for r in last_record.values():
        if r.lifespan > 0:
            episodes.setdefault(r.mode, []).append(r.lifespan)
    return {mode: float(np.mean(spans)) for mode, spans in episodes.items()}
