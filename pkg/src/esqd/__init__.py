"""Quality-diversity optimization with many parallel ES emitters over a
MAP-Elites grid archive, plus GA/ES baselines, benchmark tasks, uncertain-QD
metrics and an experiment harness."""

from .archive import BoundedBox, EliteArchive, Evaluation, GridSpec
from .emitters import MultiEsConfig, run as run_multi_es
from .es import ESConfig, OptimizerState
from .novelty import NoveltyArchive, NoveltyConfig
from .tasks import make_task

__all__ = [
    "BoundedBox",
    "EliteArchive",
    "Evaluation",
    "GridSpec",
    "MultiEsConfig",
    "run_multi_es",
    "ESConfig",
    "OptimizerState",
    "NoveltyArchive",
    "NoveltyConfig",
    "make_task",
]
