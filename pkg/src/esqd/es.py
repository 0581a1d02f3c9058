"""Evolution-strategy core: Gaussian sampling around a mean, rank-normalized
fitness shaping, sample-based natural-gradient estimate and the per-thread
first-order optimizer (adaptive moments by default, plain SGD selectable).
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace

import numpy as np

log = logging.getLogger(__name__)

ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPS = 1e-8


@dataclass(frozen=True)
class ESConfig:
    sample_count: int = 512
    sigma: float = 0.02
    learning_rate: float = 0.01
    l2_coefficient: float = 0.0
    optimizer: str = "adam"  # "adam" | "sgd"

    def __post_init__(self):
        if self.sample_count < 2:
            raise ValueError("sample_count must be >= 2")
        if self.sigma <= 0:
            raise ValueError("sigma must be positive")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if self.l2_coefficient < 0:
            raise ValueError("l2_coefficient must be non-negative")
        if self.optimizer not in ("adam", "sgd"):
            raise ValueError(f"unknown optimizer {self.optimizer!r}")


@dataclass(frozen=True)
class OptimizerState:
    first_moment: np.ndarray
    second_moment: np.ndarray
    step_count: int = 0

    @classmethod
    def zeros(cls, dim: int) -> "OptimizerState":
        return cls(np.zeros(dim), np.zeros(dim), 0)


@dataclass
class SampleBatch:
    """One generation's perturbations: genomes[i] = mean + sigma * noise[i]."""

    noise: np.ndarray
    genomes: np.ndarray
    raw_scores: np.ndarray | None = None


def sample_batch(mean: np.ndarray, cfg: ESConfig, rng: np.random.Generator) -> SampleBatch:
    noise = rng.standard_normal(size=(cfg.sample_count, mean.size))
    return SampleBatch(noise=noise, genomes=mean + cfg.sigma * noise)


def rank_shape(raw_scores: np.ndarray) -> np.ndarray:
    """Centered normalized ranks in [-0.5, 0.5], ascending (0 = worst).

    Ties break by sample index (stable sort).  Non-finite scores are floored
    to the worst ranks rather than aborting the step.
    """
    scores = np.asarray(raw_scores, dtype=float)
    n = scores.size
    if n < 2:
        raise ValueError("need at least 2 scores to rank")
    bad = ~np.isfinite(scores)
    if bad.any():
        log.warning("rank_shape: flooring %d non-finite scores", int(bad.sum()))
        scores = np.where(bad, -np.inf, scores)
    order = np.argsort(scores, kind="stable")
    ranks = np.empty(n)
    ranks[order] = np.arange(n)
    return ranks / (n - 1) - 0.5


def estimate_gradient(batch: SampleBatch, cfg: ESConfig) -> np.ndarray:
    """Ascent-direction natural-gradient estimate from shaped scores."""
    if batch.raw_scores is None:
        raise ValueError("batch scores are unset")
    shaped = rank_shape(batch.raw_scores)
    return gradient_from_shaped(batch.noise, shaped, cfg)


def gradient_from_shaped(
    noise: np.ndarray, shaped: np.ndarray, cfg: ESConfig
) -> np.ndarray:
    return noise.T @ shaped / (cfg.sample_count * cfg.sigma)


def optimizer_update(
    mean: np.ndarray,
    grad: np.ndarray,
    opt: OptimizerState,
    cfg: ESConfig,
) -> tuple[np.ndarray, OptimizerState]:
    """One ascent step on grad (with weight decay).  Non-finite gradients skip
    the update; the caller is expected to flag the emitter for reset."""
    if not np.all(np.isfinite(grad)):
        log.warning("optimizer_update: skipping non-finite gradient")
        return mean, opt
    g = grad - cfg.l2_coefficient * mean
    if cfg.optimizer == "sgd":
        return mean + cfg.learning_rate * g, replace(
            opt, step_count=opt.step_count + 1
        )
    t = opt.step_count + 1
    m = ADAM_BETA1 * opt.first_moment + (1 - ADAM_BETA1) * g
    v = ADAM_BETA2 * opt.second_moment + (1 - ADAM_BETA2) * g * g
    m_hat = m / (1 - ADAM_BETA1**t)
    v_hat = v / (1 - ADAM_BETA2**t)
    new_mean = mean + cfg.learning_rate * m_hat / (np.sqrt(v_hat) + ADAM_EPS)
    return new_mean, OptimizerState(m, v, t)


def step_from_shaped(
    mean: np.ndarray,
    opt: OptimizerState,
    noise: np.ndarray,
    shaped: np.ndarray,
    cfg: ESConfig,
) -> tuple[np.ndarray, OptimizerState, bool]:
    """Gradient + update from already-shaped scores.  Returns (mean, opt, ok)
    where ok is False when the gradient was non-finite and the update skipped."""
    grad = gradient_from_shaped(noise, shaped, cfg)
    ok = bool(np.all(np.isfinite(grad)))
    new_mean, new_opt = optimizer_update(mean, grad, opt, cfg)
    return new_mean, new_opt, ok


def es_step(
    mean: np.ndarray,
    opt: OptimizerState,
    objective,
    cfg: ESConfig,
    rng: np.random.Generator,
) -> tuple[np.ndarray, OptimizerState, SampleBatch]:
    """Full step: sample, score with objective(genomes) -> (N,) array, shape,
    estimate the gradient and update the mean.  The evaluated batch is returned
    so callers may offer the samples to an archive."""
    batch = sample_batch(mean, cfg, rng)
    batch.raw_scores = np.asarray(objective(batch.genomes), dtype=float)
    shaped = rank_shape(batch.raw_scores)
    new_mean, new_opt, _ = step_from_shaped(mean, opt, batch.noise, shaped, cfg)
    return new_mean, new_opt, batch
