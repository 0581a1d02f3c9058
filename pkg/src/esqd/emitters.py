"""Scheduler for many parallel ES emitters over a shared elite archive.

Each emitter owns a search-distribution mean, an optimizer state and a fixed
objective (task fitness for exploit emitters, novelty score for explore
emitters).  Per generation every emitter takes one ES step from read-only
archive snapshots; all archive writes happen serially at a barrier in emitter
order, so results never depend on how the parallel phase is scheduled.

Stagnant emitters (more than stagnation_budget consecutive archive rejections)
restart from a uniform archive draw with a fresh optimizer.  A fixed-period
reset mode (optionally swapping every emitter's objective, which recovers the
sequential explore/exploit ablation) is available instead.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import rng as rngmod
from .archive import Elite, EliteArchive, Evaluation, GridSpec
from .es import ESConfig, OptimizerState, rank_shape, sample_batch, step_from_shaped
from .novelty import NoveltyArchive, NoveltyConfig, novelty_scores
from .tasks import Task
from .variation import IsoLineConfig, iso_line_variation

EXPLOIT = "exploit"
EXPLORE = "explore"


@dataclass(frozen=True)
class MultiEsConfig:
    n_emitters: int = 32
    p_exploit: float = 0.5
    stagnation_budget: int | None = 32  # None disables stagnation resets
    add_all_samples: bool = False
    reset_mode: str = "adaptive"  # "adaptive" | "fixed"
    fixed_reset_period: int = 10
    sequential_modes: bool = False  # flip every emitter's mode on fixed reset
    es: ESConfig = field(default_factory=ESConfig)
    novelty: NoveltyConfig = field(default_factory=NoveltyConfig)
    ga_explore: IsoLineConfig = field(default_factory=IsoLineConfig)

    def __post_init__(self):
        if self.n_emitters < 1:
            raise ValueError("n_emitters must be positive")
        if not 0.0 <= self.p_exploit <= 1.0:
            raise ValueError("p_exploit must lie in [0, 1]")
        if self.stagnation_budget is not None and self.stagnation_budget < 1:
            raise ValueError("stagnation_budget must be positive or None")
        if self.reset_mode not in ("adaptive", "fixed"):
            raise ValueError(f"unknown reset_mode {self.reset_mode!r}")
        if self.fixed_reset_period < 1:
            raise ValueError("fixed_reset_period must be positive")

    @property
    def n_exploit(self) -> int:
        # round half up, so 3 emitters at 0.5 give 2 exploit
        return int(np.floor(self.n_emitters * self.p_exploit + 0.5))


@dataclass
class EmitterState:
    mode: str
    mean: np.ndarray
    optimizer: OptimizerState
    stagnation: int = 0
    require_reset: bool = False
    lifespan: int = 0
    last_feature: np.ndarray | None = None  # feature of the current mean


@dataclass
class GenerationRecord:
    """One emitter's (or one offspring's) outcome in one generation."""

    generation: int
    emitter: int
    mode: str
    added: bool
    lifespan: int
    stagnation: int
    was_reset: bool
    completed_episode: int | None
    parent_feature: np.ndarray | None
    offspring_feature: np.ndarray
    offspring_fitness: float
    evaluations: int
    offspring_genome: np.ndarray | None = None


def update_stagnation(
    stagnation: int, added: bool, budget: int | None
) -> tuple[int, bool]:
    """Stagnation-counter transition: returns (new counter, require_reset)."""
    if added:
        return 0, False
    stagnation += 1
    return stagnation, budget is not None and stagnation > budget


def init_emitters(cfg: MultiEsConfig, seeds: list[Elite]) -> list[EmitterState]:
    """First n_exploit slots exploit, the rest explore; means come from the
    evaluated seed genomes (cycled if there are fewer seeds than emitters)."""
    if not seeds:
        raise ValueError("at least one seed genome is required")
    emitters = []
    start_mode = EXPLORE if cfg.sequential_modes else None
    for e in range(cfg.n_emitters):
        mode = start_mode or (EXPLOIT if e < cfg.n_exploit else EXPLORE)
        seed = seeds[e % len(seeds)]
        emitters.append(
            EmitterState(
                mode=mode,
                mean=np.array(seed.genome, copy=True),
                optimizer=OptimizerState.zeros(seed.genome.size),
                last_feature=np.array(seed.feature, copy=True),
            )
        )
    return emitters


@dataclass
class _StepResult:
    new_mean: np.ndarray
    new_optimizer: OptimizerState
    offspring_fitness: float
    offspring_feature: np.ndarray
    parent_feature: np.ndarray | None
    was_reset: bool
    completed_episode: int | None
    grad_ok: bool
    evaluations: int
    mode_used: str = EXPLOIT
    sample_genomes: np.ndarray | None = None
    sample_fitnesses: np.ndarray | None = None
    sample_features: np.ndarray | None = None


def _emitter_phase(
    emitter: EmitterState,
    cfg: MultiEsConfig,
    task: Task,
    elite_archive: EliteArchive,
    novelty_snapshot: np.ndarray | None,
    seed: int,
    e: int,
    g: int,
) -> _StepResult:
    """Pure per-emitter computation against read-only snapshots."""
    rng = rngmod.stream(seed, rngmod.EMITTER, e, g)
    mean = emitter.mean
    optimizer = emitter.optimizer
    last_feature = emitter.last_feature
    mode = emitter.mode
    was_reset = False
    completed = None

    due_fixed = (
        cfg.reset_mode == "fixed" and g > 0 and g % cfg.fixed_reset_period == 0
    )
    if emitter.require_reset or due_fixed:
        entry = elite_archive.select_entries(rng, 1)[0]
        mean = np.array(entry.genome, copy=True)
        optimizer = OptimizerState.zeros(mean.size)
        last_feature = np.array(entry.feature, copy=True)
        was_reset = True
        completed = emitter.lifespan
        if cfg.sequential_modes:
            mode = EXPLOIT if mode == EXPLORE else EXPLORE

    if cfg.novelty.backend == "ga" and mode == EXPLORE:
        parents = elite_archive.select_entries(rng, 2)
        child = iso_line_variation(
            parents[0].genome,
            parents[1].genome,
            cfg.ga_explore,
            rng,
            domain=task.spec.genome_domain,
        )
        fit, feat = task.evaluate_batch(child[None, :], rng)
        return _StepResult(
            new_mean=child,
            new_optimizer=OptimizerState.zeros(child.size),
            offspring_fitness=float(fit[0]),
            offspring_feature=feat[0],
            parent_feature=np.array(parents[0].feature, copy=True),
            was_reset=was_reset,
            completed_episode=completed,
            grad_ok=True,
            evaluations=1,
            mode_used=mode,
        )

    batch = sample_batch(mean, cfg.es, rng)
    fits, feats = task.evaluate_batch(batch.genomes, rng)
    if mode == EXPLOIT:
        shaped = rank_shape(fits)
    else:
        shaped = rank_shape(
            novelty_scores(feats, novelty_snapshot, cfg.novelty.k_nearest)
        )
    new_mean, new_optimizer, grad_ok = step_from_shaped(
        mean, optimizer, batch.noise, shaped, cfg.es
    )
    off_fit, off_feat = task.evaluate_batch(new_mean[None, :], rng)
    return _StepResult(
        new_mean=new_mean,
        new_optimizer=new_optimizer,
        offspring_fitness=float(off_fit[0]),
        offspring_feature=off_feat[0],
        parent_feature=last_feature,
        was_reset=was_reset,
        completed_episode=completed,
        grad_ok=grad_ok,
        evaluations=cfg.es.sample_count + 1,
        mode_used=mode,
        sample_genomes=batch.genomes,
        sample_fitnesses=fits,
        sample_features=feats,
    )


def generation_step(
    emitters: list[EmitterState],
    elite_archive: EliteArchive,
    novelty_archive: NoveltyArchive,
    cfg: MultiEsConfig,
    task: Task,
    seed: int,
    g: int,
    executor: ThreadPoolExecutor | None = None,
) -> list[GenerationRecord]:
    """Run one generation in place: parallel emitter phase on snapshots, then
    serial barrier applying archive writes and counter updates in emitter
    order."""
    if cfg.novelty.backend == "elites":
        snapshot = elite_archive.features()
    elif cfg.novelty.backend in ("fifo", "all"):
        snapshot = novelty_archive.snapshot()
    else:
        # "none" keeps no store (every sample scores the empty-store
        # sentinel); "ga" never reads the snapshot
        snapshot = np.empty((0, 0))

    def phase(e: int) -> _StepResult:
        return _emitter_phase(
            emitters[e], cfg, task, elite_archive, snapshot, seed, e, g
        )

    indices = range(len(emitters))
    if executor is None:
        results = [phase(e) for e in indices]
    else:
        results = list(executor.map(phase, indices))

    records = []
    for e, (emitter, res) in enumerate(zip(emitters, results)):
        if res.was_reset:
            emitter.stagnation = 0
            emitter.require_reset = False
            emitter.lifespan = 0
        emitter.mode = res.mode_used
        emitter.mean = res.new_mean
        emitter.optimizer = res.new_optimizer
        emitter.last_feature = res.offspring_feature

        added = elite_archive.try_add(
            res.new_mean, Evaluation(res.offspring_fitness, res.offspring_feature)
        )
        if cfg.add_all_samples and res.sample_genomes is not None:
            elite_archive.try_add_batch(
                res.sample_genomes, res.sample_fitnesses, res.sample_features
            )

        if cfg.reset_mode == "adaptive":
            emitter.stagnation, flag = update_stagnation(
                emitter.stagnation, added, cfg.stagnation_budget
            )
            emitter.require_reset = flag or not res.grad_ok
        else:
            emitter.stagnation, _ = update_stagnation(
                emitter.stagnation, added, None
            )
        emitter.lifespan += 1

        records.append(
            GenerationRecord(
                generation=g,
                emitter=e,
                mode=emitter.mode,
                added=added,
                lifespan=emitter.lifespan,
                stagnation=emitter.stagnation,
                was_reset=res.was_reset,
                completed_episode=res.completed_episode,
                parent_feature=res.parent_feature,
                offspring_feature=res.offspring_feature,
                offspring_fitness=res.offspring_fitness,
                evaluations=res.evaluations,
                offspring_genome=res.new_mean,
            )
        )

    if cfg.novelty.backend in ("fifo", "all"):
        novelty_archive.insert(
            np.stack([r.offspring_feature for r in records])
        )
        if cfg.novelty.include_samples:
            samples = [
                res.sample_features
                for res in results
                if res.sample_features is not None
            ]
            if samples:
                novelty_archive.insert(np.concatenate(samples))
    return records


def seed_archive(
    task: Task, archive: EliteArchive, count: int, seed: int
) -> list[Elite]:
    """Evaluate `count` uniform random genomes, add them to the archive and
    return the evaluated seeds in draw order."""
    genomes = task.spec.genome_domain.sample_uniform(
        rngmod.stream(seed, rngmod.SEED_GENOMES), count
    )
    fits, feats = task.evaluate_batch(genomes, rngmod.stream(seed, rngmod.SEED_EVAL))
    seeds = []
    for i in range(count):
        archive.try_add(genomes[i], Evaluation(float(fits[i]), feats[i]))
        seeds.append(Elite(genomes[i], float(fits[i]), feats[i]))
    return seeds


def run(
    cfg: MultiEsConfig,
    task: Task,
    archive_spec: GridSpec,
    n_generations: int,
    seed: int,
    workers: int = 1,
    on_generation=None,
) -> tuple[EliteArchive, list[list[GenerationRecord]]]:
    """Full scheduler run.  Seeds the archive with n_emitters random genomes,
    then iterates generation_step; on_generation(g, archive, records) fires
    after every generation (records is None for the seeding step, g = 0)."""
    archive = EliteArchive(archive_spec)
    seeds = seed_archive(task, archive, cfg.n_emitters, seed)
    emitters = init_emitters(cfg, seeds)
    novelty_archive = NoveltyArchive.for_config(cfg.novelty)
    reports: list[list[GenerationRecord]] = []
    if on_generation is not None:
        on_generation(0, archive, None)
    executor = ThreadPoolExecutor(max_workers=workers) if workers > 1 else None
    try:
        for g in range(n_generations):
            records = generation_step(
                emitters, archive, novelty_archive, cfg, task, seed, g, executor
            )
            reports.append(records)
            if on_generation is not None:
                on_generation(g + 1, archive, records)
    finally:
        if executor is not None:
            executor.shutdown()
    return archive, reports
