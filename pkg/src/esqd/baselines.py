"""Reference algorithms sharing the archive, ES, novelty and task layers:
grid-archive GA search with iso+line variation (with an optional re-evaluation
averaging mode for uncertain tasks), the single-thread alternating
explore/exploit ES, the plain-ES family with novelty-weighted objectives, and
the fixed-cadence sequential variant of the emitter scheduler.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from . import rng as rngmod
from .archive import EliteArchive, Evaluation, GridSpec
from .emitters import (
    EXPLOIT,
    EXPLORE,
    GenerationRecord,
    MultiEsConfig,
    run as run_scheduler,
    seed_archive,
)
from .es import ESConfig, OptimizerState, rank_shape, sample_batch, step_from_shaped
from .novelty import NoveltyArchive, NoveltyConfig, novelty_scores
from .tasks import Task
from .variation import IsoLineConfig, iso_line_variation


def run_me(
    task: Task,
    archive_spec: GridSpec,
    cfg: IsoLineConfig,
    n_generations: int,
    seed: int,
    on_generation=None,
) -> tuple[EliteArchive, list[list[GenerationRecord]]]:
    """Vanilla grid-archive GA: uniform parent pairs, iso+line children."""
    return run_me_sampling(
        task, archive_spec, cfg, 1, n_generations, seed, on_generation
    )


def run_me_sampling(
    task: Task,
    archive_spec: GridSpec,
    cfg: IsoLineConfig,
    n_reevals: int,
    n_generations: int,
    seed: int,
    on_generation=None,
) -> tuple[EliteArchive, list[list[GenerationRecord]]]:
    """GA with each child evaluated n_reevals times; the mean fitness and mean
    feature are used for archive addition.  n_reevals=1 is the plain GA."""
    if n_reevals < 1:
        raise ValueError("n_reevals must be >= 1")
    archive = EliteArchive(archive_spec)
    seed_archive(task, archive, cfg.batch_size, seed)
    reports: list[list[GenerationRecord]] = []
    if on_generation is not None:
        on_generation(0, archive, None)
    for g in range(n_generations):
        rng = rngmod.stream(seed, rngmod.VARIATION, g)
        parents = archive.select_entries(rng, 2 * cfg.batch_size)
        children = np.stack(
            [
                iso_line_variation(
                    parents[2 * i].genome,
                    parents[2 * i + 1].genome,
                    cfg,
                    rng,
                    domain=task.spec.genome_domain,
                )
                for i in range(cfg.batch_size)
            ]
        )
        repeated = np.repeat(children, n_reevals, axis=0)
        fits, feats = task.evaluate_batch(repeated, rng)
        fits = fits.reshape(cfg.batch_size, n_reevals).mean(axis=1)
        feats = feats.reshape(cfg.batch_size, n_reevals, -1).mean(axis=1)
        records = []
        for i in range(cfg.batch_size):
            added = archive.try_add(children[i], Evaluation(float(fits[i]), feats[i]))
            records.append(
                GenerationRecord(
                    generation=g,
                    emitter=i,
                    mode=EXPLOIT,
                    added=added,
                    lifespan=0,
                    stagnation=0,
                    was_reset=False,
                    completed_episode=None,
                    parent_feature=parents[2 * i].feature,
                    offspring_feature=feats[i],
                    offspring_fitness=float(fits[i]),
                    evaluations=n_reevals,
                )
            )
        reports.append(records)
        if on_generation is not None:
            on_generation(g + 1, archive, records)
    return archive, reports


@dataclass(frozen=True)
class MeEsConfig:
    mode_length: int = 10
    bias_quantile: float = 0.1  # top fraction eligible for biased selection
    es: ESConfig = field(
        default_factory=lambda: ESConfig(sample_count=10_000, l2_coefficient=0.01)
    )
    novelty: NoveltyConfig = field(default_factory=NoveltyConfig)

    def __post_init__(self):
        if self.mode_length < 1:
            raise ValueError("mode_length must be >= 1")
        if not 0.0 < self.bias_quantile <= 1.0:
            raise ValueError("bias_quantile must lie in (0, 1]")


def _biased_select(
    archive: EliteArchive, scores: np.ndarray, quantile: float, rng
) -> int:
    """Index (into canonical occupant order) of a uniform draw from the
    top-quantile occupants by `scores`."""
    n_top = max(1, int(np.ceil(quantile * scores.size)))
    top = np.argsort(-scores, kind="stable")[:n_top]
    return int(top[rng.integers(0, n_top)])


def run_me_es(
    task: Task,
    archive_spec: GridSpec,
    cfg: MeEsConfig,
    n_generations: int,
    seed: int,
    on_generation=None,
) -> tuple[EliteArchive, list[list[GenerationRecord]]]:
    """Single ES thread alternating explore/exploit every mode_length
    generations, restarting each mode from a biased archive draw (top decile
    by novelty or by fitness)."""
    archive = EliteArchive(archive_spec)
    seeds = seed_archive(task, archive, 1, seed)
    novelty_archive = NoveltyArchive.for_config(cfg.novelty)
    mean = np.array(seeds[0].genome, copy=True)
    optimizer = OptimizerState.zeros(mean.size)
    mode = EXPLORE
    last_feature = np.array(seeds[0].feature, copy=True)
    lifespan = 0
    reports: list[list[GenerationRecord]] = []
    if on_generation is not None:
        on_generation(0, archive, None)
    for g in range(n_generations):
        rng = rngmod.stream(seed, rngmod.EMITTER, 0, g)
        was_reset = False
        completed = None
        period = 2 * cfg.mode_length
        if g % period == 0 or g % period == cfg.mode_length:
            elites = archive.elites()
            if g % period == 0:
                mode = EXPLORE
                store = novelty_archive.snapshot()
                scores = novelty_scores(
                    archive.features(), store, cfg.novelty.k_nearest
                )
            else:
                mode = EXPLOIT
                scores = archive.fitnesses()
            pick = elites[_biased_select(archive, scores, cfg.bias_quantile, rng)]
            mean = np.array(pick.genome, copy=True)
            last_feature = np.array(pick.feature, copy=True)
            optimizer = OptimizerState.zeros(mean.size)
            if g > 0:
                was_reset = True
                completed = lifespan
                lifespan = 0
        batch = sample_batch(mean, cfg.es, rng)
        fits, feats = task.evaluate_batch(batch.genomes, rng)
        if mode == EXPLOIT:
            shaped = rank_shape(fits)
        else:
            shaped = rank_shape(
                novelty_scores(
                    feats, novelty_archive.snapshot(), cfg.novelty.k_nearest
                )
            )
        mean, optimizer, _ = step_from_shaped(
            mean, optimizer, batch.noise, shaped, cfg.es
        )
        off_fit, off_feat = task.evaluate_batch(mean[None, :], rng)
        added = archive.try_add(mean, Evaluation(float(off_fit[0]), off_feat[0]))
        novelty_archive.insert(off_feat)
        lifespan += 1
        records = [
            GenerationRecord(
                generation=g,
                emitter=0,
                mode=mode,
                added=added,
                lifespan=lifespan,
                stagnation=0,
                was_reset=was_reset,
                completed_episode=completed,
                parent_feature=last_feature,
                offspring_feature=off_feat[0],
                offspring_fitness=float(off_fit[0]),
                evaluations=cfg.es.sample_count + 1,
                offspring_genome=mean,
            )
        ]
        last_feature = off_feat[0]
        reports.append(records)
        if on_generation is not None:
            on_generation(g + 1, archive, records)
    return archive, reports


ES_VARIANTS = ("es", "ns_es", "nsr_es", "nsra_es")


@dataclass(frozen=True)
class EsFamilyConfig:
    es: ESConfig = field(default_factory=ESConfig)
    novelty: NoveltyConfig = field(default_factory=NoveltyConfig)
    meta_population: int = 1  # round-robin pool of means (5 for ns_es)
    fitness_weight: float = 0.5  # nsr_es mixing weight; nsra_es starts at 1.0
    adapt_amount: float = 0.05
    adapt_period: int = 50

    def __post_init__(self):
        if self.meta_population < 1:
            raise ValueError("meta_population must be >= 1")
        if not 0.0 <= self.fitness_weight <= 1.0:
            raise ValueError("fitness_weight must lie in [0, 1]")
        if self.adapt_amount <= 0 or self.adapt_period < 1:
            raise ValueError("invalid adaptation parameters")


def default_es_family_config(variant: str) -> EsFamilyConfig:
    if variant == "ns_es":
        return EsFamilyConfig(meta_population=5)
    if variant == "nsra_es":
        return EsFamilyConfig(fitness_weight=1.0)
    return EsFamilyConfig()


def run_es_family(
    task: Task,
    archive_spec: GridSpec,
    variant: str,
    cfg: EsFamilyConfig,
    n_generations: int,
    seed: int,
    on_generation=None,
) -> tuple[EliteArchive, list[list[GenerationRecord]]]:
    """Plain-ES family with a passive elite archive.

    es: fitness objective.  ns_es: novelty objective over a round-robin pool
    of means.  nsr_es: fixed w-weighted mix of rank-shaped fitness and
    rank-shaped novelty.  nsra_es: like nsr_es but w adapts toward novelty
    when max fitness stagnates and back toward fitness on improvement.
    """
    if variant not in ES_VARIANTS:
        raise ValueError(f"unknown variant {variant!r}; known: {ES_VARIANTS}")
    archive = EliteArchive(archive_spec)
    seeds = seed_archive(task, archive, cfg.meta_population, seed)
    novelty_archive = NoveltyArchive.for_config(cfg.novelty)
    means = [np.array(s.genome, copy=True) for s in seeds]
    optimizers = [OptimizerState.zeros(m.size) for m in means]
    last_features = [np.array(s.feature, copy=True) for s in seeds]
    uses_novelty = variant != "es"
    weight = cfg.fitness_weight
    best_fitness = max(s.fitness for s in seeds)
    best_at_checkpoint = best_fitness
    reports: list[list[GenerationRecord]] = []
    if on_generation is not None:
        on_generation(0, archive, None)
    for g in range(n_generations):
        if variant == "nsra_es" and g > 0 and g % cfg.adapt_period == 0:
            if best_fitness > best_at_checkpoint:
                weight = min(1.0, weight + cfg.adapt_amount)
            else:
                weight = max(0.0, weight - cfg.adapt_amount)
            best_at_checkpoint = best_fitness
        idx = g % len(means)
        rng = rngmod.stream(seed, rngmod.EMITTER, idx, g)
        batch = sample_batch(means[idx], cfg.es, rng)
        fits, feats = task.evaluate_batch(batch.genomes, rng)
        if variant == "es":
            shaped = rank_shape(fits)
        else:
            nov = novelty_scores(
                feats, novelty_archive.snapshot(), cfg.novelty.k_nearest
            )
            if variant == "ns_es":
                shaped = rank_shape(nov)
            else:
                shaped = weight * rank_shape(fits) + (1.0 - weight) * rank_shape(nov)
        means[idx], optimizers[idx], _ = step_from_shaped(
            means[idx], optimizers[idx], batch.noise, shaped, cfg.es
        )
        off_fit, off_feat = task.evaluate_batch(means[idx][None, :], rng)
        added = archive.try_add(
            means[idx], Evaluation(float(off_fit[0]), off_feat[0])
        )
        if uses_novelty:
            novelty_archive.insert(off_feat)
        best_fitness = max(best_fitness, float(off_fit[0]))
        records = [
            GenerationRecord(
                generation=g,
                emitter=idx,
                mode=EXPLORE if variant == "ns_es" else EXPLOIT,
                added=added,
                lifespan=g + 1,
                stagnation=0,
                was_reset=False,
                completed_episode=None,
                parent_feature=last_features[idx],
                offspring_feature=off_feat[0],
                offspring_fitness=float(off_fit[0]),
                evaluations=cfg.es.sample_count + 1,
                offspring_genome=means[idx],
            )
        ]
        last_features[idx] = off_feat[0]
        reports.append(records)
        if on_generation is not None:
            on_generation(g + 1, archive, records)
    return archive, reports


def run_multi_es_sequential(
    task: Task,
    archive_spec: GridSpec,
    cfg: MultiEsConfig,
    n_generations: int,
    seed: int,
    workers: int = 1,
    on_generation=None,
) -> tuple[EliteArchive, list[list[GenerationRecord]]]:
    """Scheduler ablation: adaptive reset disabled, every emitter reset and
    mode-swapped on a fixed 10-generation cadence."""
    seq = replace(
        cfg,
        reset_mode="fixed",
        fixed_reset_period=10,
        sequential_modes=True,
        stagnation_budget=None,
    )
    return run_scheduler(
        seq, task, archive_spec, n_generations, seed, workers, on_generation
    )
