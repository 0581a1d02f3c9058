"""Random variation operators shared by the GA baselines and the GA explore
backend of the emitter scheduler."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .archive import BoundedBox


@dataclass(frozen=True)
class IsoLineConfig:
    iso_sigma: float = 0.01
    line_sigma: float = 0.1
    batch_size: int = 128

    def __post_init__(self):
        if self.iso_sigma < 0 or self.line_sigma < 0:
            raise ValueError("sigmas must be non-negative")
        if self.batch_size < 1:
            raise ValueError("batch_size must be positive")


def iso_line_variation(
    parent1: np.ndarray,
    parent2: np.ndarray,
    cfg: IsoLineConfig,
    rng: np.random.Generator,
    domain: BoundedBox | None = None,
) -> np.ndarray:
    """Isotropic Gaussian noise plus correlated noise along the parent line:
    child = p1 + iso_sigma * n + line_sigma * u * (p2 - p1)."""
    parent1 = np.asarray(parent1, dtype=float)
    parent2 = np.asarray(parent2, dtype=float)
    if parent1.shape != parent2.shape:
        raise ValueError("parents must share dimensionality")
    noise = rng.standard_normal(parent1.shape)
    u = rng.standard_normal()
    child = parent1 + cfg.iso_sigma * noise + cfg.line_sigma * u * (parent2 - parent1)
    if domain is not None:
        child = domain.clip(child)
    return child
