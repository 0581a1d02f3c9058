"""Benchmark tasks: the redundant planar arm (deterministic and noisy) and an
analytic deceptive point-navigation task with a wall the solution must pass
around.  All tasks are pure given (genome, rng draw) and vectorized over
batches of genomes.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .archive import BoundedBox, Evaluation


@dataclass(frozen=True)
class TaskSpec:
    name: str
    genome_dim: int
    genome_domain: BoundedBox
    feature_bounds: BoundedBox
    stochastic: bool
    fitness_offset: float


class Task:
    """Interface: subclasses implement evaluate_batch and expose a spec."""

    spec: TaskSpec

    def evaluate_batch(
        self, genomes: np.ndarray, rng: np.random.Generator | None = None
    ) -> tuple[np.ndarray, np.ndarray]:
        raise NotImplementedError

    def evaluate(
        self, genome: np.ndarray, rng: np.random.Generator | None = None
    ) -> Evaluation:
        fit, feat = self.evaluate_batch(np.asarray(genome, dtype=float)[None, :], rng)
        return Evaluation(float(fit[0]), feat[0])


class ArmTask(Task):
    """n-joint redundant planar arm.

    Genome in [0, 1]^n maps to joint angles ((theta - 0.5) * pi), links of
    length 1/n.  Fitness rewards smooth configurations (low joint variance);
    the feature is the end-effector position rescaled to [0, 1]^2.  The noisy
    variant perturbs the joint commands before kinematics, so fitness and
    feature noise are correlated.
    """

    def __init__(self, n_joints: int = 1000, noise_sigma: float = 0.0):
        if n_joints < 1:
            raise ValueError("n_joints must be >= 1")
        self.n_joints = n_joints
        self.noise_sigma = float(noise_sigma)
        name = "arm_noisy" if self.noise_sigma > 0 else "arm"
        self.spec = TaskSpec(
            name=name,
            genome_dim=n_joints,
            genome_domain=BoundedBox(np.zeros(n_joints), np.ones(n_joints)),
            feature_bounds=BoundedBox(np.zeros(2), np.ones(2)),
            stochastic=self.noise_sigma > 0,
            fitness_offset=0.0,
        )

    def evaluate_batch(self, genomes, rng=None):
        theta = np.clip(np.asarray(genomes, dtype=float), 0.0, 1.0)
        if self.noise_sigma > 0:
            if rng is None:
                raise ValueError("noisy arm requires an rng")
            theta = theta + rng.normal(0.0, self.noise_sigma, size=theta.shape)
        fitness = 1.0 - np.sqrt(
            np.mean((theta - theta.mean(axis=1, keepdims=True)) ** 2, axis=1)
        )
        angles = (theta - 0.5) * np.pi
        cumulative = np.cumsum(angles, axis=1)
        x = np.mean(np.cos(cumulative), axis=1)
        y = np.mean(np.sin(cumulative), axis=1)
        features = np.stack([(x + 1.0) / 2.0, (y + 1.0) / 2.0], axis=1)
        return fitness, features


# Frozen geometry of the deceptive point task; changing these invalidates
# any cross-run comparisons.
TRAP_STEPS = 10
TRAP_SPEED = 0.1
WALL_X = (0.25, 0.30)
WALL_Y = (-0.25, 0.25)
_PROJECTION_SEED = 20230415
PROJECTION = np.random.default_rng(_PROJECTION_SEED).normal(size=(2, 2))


def _segment_hits_wall(p: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Vectorized segment vs axis-aligned wall rectangle test (slab method)."""
    d = q - p
    t0 = np.zeros(len(p))
    t1 = np.ones(len(p))
    miss = np.zeros(len(p), dtype=bool)
    for axis, (lo, hi) in enumerate((WALL_X, WALL_Y)):
        da = d[:, axis]
        pa = p[:, axis]
        parallel = np.abs(da) < 1e-12
        miss |= parallel & ((pa < lo) | (pa > hi))
        safe = np.where(parallel, 1.0, da)
        ta = (lo - pa) / safe
        tb = (hi - pa) / safe
        lo_t = np.minimum(ta, tb)
        hi_t = np.maximum(ta, tb)
        t0 = np.where(parallel, t0, np.maximum(t0, lo_t))
        t1 = np.where(parallel, t1, np.minimum(t1, hi_t))
    return ~miss & (t0 <= t1)


class PointTrapTask(Task):
    """Deceptive 2-D navigation: a point is driven for a fixed number of steps
    by a seeded linear projection of genome slices; a wall blocks the direct
    path and fitness (final x) is deceptive, so passing requires a detour.
    Genome components beyond index 2 * TRAP_STEPS are unused.
    """

    def __init__(self, genome_dim: int = 2 * TRAP_STEPS, noise_sigma: float = 0.0):
        if genome_dim < 2 * TRAP_STEPS:
            raise ValueError(f"genome_dim must be >= {2 * TRAP_STEPS}")
        self.noise_sigma = float(noise_sigma)
        name = "point_trap_noisy" if self.noise_sigma > 0 else "point_trap"
        self.spec = TaskSpec(
            name=name,
            genome_dim=genome_dim,
            genome_domain=BoundedBox(-np.ones(genome_dim), np.ones(genome_dim)),
            feature_bounds=BoundedBox(-np.ones(2), np.ones(2)),
            stochastic=self.noise_sigma > 0,
            fitness_offset=1.0,
        )

    def evaluate_batch(self, genomes, rng=None):
        g = np.clip(np.asarray(genomes, dtype=float), -1.0, 1.0)
        if self.noise_sigma > 0 and rng is None:
            raise ValueError("noisy point_trap requires an rng")
        pos = np.zeros((len(g), 2))
        for t in range(TRAP_STEPS):
            controls = g[:, 2 * t : 2 * t + 2]
            v = TRAP_SPEED * np.tanh(controls @ PROJECTION.T)
            if self.noise_sigma > 0:
                v = v + rng.normal(0.0, self.noise_sigma, size=v.shape)
            candidate = pos + v
            blocked = _segment_hits_wall(pos, candidate)
            pos = np.where(blocked[:, None], pos, candidate)
        fitness = pos[:, 0].copy()
        features = np.clip(pos, -1.0, 1.0)
        return fitness, features


def reevaluate(
    task: Task, genome: np.ndarray, m: int, rng: np.random.Generator | None = None
) -> tuple[Evaluation, np.ndarray, np.ndarray]:
    """Evaluate a genome m times; returns (mean Evaluation, fitness std,
    per-component feature std)."""
    if m < 1:
        raise ValueError("m must be >= 1")
    genomes = np.tile(np.asarray(genome, dtype=float), (m, 1))
    fits, feats = task.evaluate_batch(genomes, rng)
    mean_eval = Evaluation(float(fits.mean()), feats.mean(axis=0))
    return mean_eval, fits.std(), feats.std(axis=0)


TASKS = {
    "arm": lambda **p: ArmTask(**{"noise_sigma": 0.0, **p}),
    "arm_noisy": lambda **p: ArmTask(**{"noise_sigma": 0.002, **p}),
    "point_trap": lambda **p: PointTrapTask(**{"noise_sigma": 0.0, **p}),
    "point_trap_noisy": lambda **p: PointTrapTask(**{"noise_sigma": 0.005, **p}),
}


def make_task(name: str, params: dict | None = None) -> Task:
    if name not in TASKS:
        raise ValueError(f"unknown task {name!r}; known: {sorted(TASKS)}")
    return TASKS[name](**(params or {}))
