"""Experiment orchestration: validated run configs, seeded deterministic
execution of any registered algorithm, metrics/archive persistence, the
re-evaluation correction pass and one-axis parameter sweeps.

Outputs per run, under <output_dir>/<run-id>/:
    metrics.csv      one row per metric cadence (generation 0 included)
    archive_final.json
    summary.json
Floats are serialized with full round-trip precision.
"""
from __future__ import annotations

import csv
import hashlib
import json
import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from .archive import BoundedBox, EliteArchive, GridSpec
from .baselines import (
    EsFamilyConfig,
    MeEsConfig,
    default_es_family_config,
    run_es_family,
    run_me,
    run_me_es,
    run_me_sampling,
    run_multi_es_sequential,
)
from .emitters import EXPLOIT, EXPLORE, MultiEsConfig, run as run_multi_es
from .es import ESConfig
from .metrics import (
    archive_metrics,
    corrected_archive,
    emitter_lifespans,
    parent_offspring_distances,
)
from .novelty import NoveltyConfig
from .tasks import TASKS, make_task
from .variation import IsoLineConfig

OUTPUT_ROOT_ENV = "ESQD_OUTPUT_ROOT"

METRICS_COLUMNS = [
    "generation",
    "evaluations",
    "qd_score",
    "coverage",
    "max_fitness",
    "occupied_cells",
    "exploit_added",
    "explore_added",
    "exploit_mean_lifespan",
    "explore_mean_lifespan",
    "dist_median",
    "dist_q25",
    "dist_q75",
]


class ConfigError(ValueError):
    """Raised for invalid run configurations; message names the field."""


@dataclass
class RunConfig:
    task: str
    algorithm: str
    n_generations: int
    seed: int
    output_dir: str = "runs"
    task_params: dict = field(default_factory=dict)
    algo_params: dict = field(default_factory=dict)
    archive: dict = field(
        default_factory=lambda: {
            "low": [0.0, 0.0],
            "high": [1.0, 1.0],
            "cells_per_dim": [100, 100],
        }
    )
    cadence: int = 10
    workers: int = 1
    snapshot_cadence: int = 0

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        known = set(cls.__dataclass_fields__)
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config field(s): {sorted(unknown)}")
        missing = {"task", "algorithm", "n_generations", "seed"} - set(data)
        if missing:
            raise ConfigError(f"missing required field(s): {sorted(missing)}")
        cfg = cls(**data)
        cfg.validate()
        return cfg

    @classmethod
    def from_file(cls, path) -> "RunConfig":
        with open(path, encoding="utf-8") as f:
            data = yaml.safe_load(f)
        if not isinstance(data, dict):
            raise ConfigError(f"config {path} must be a mapping")
        return cls.from_dict(data)

    def validate(self) -> None:
        if self.task not in TASKS:
            raise ConfigError(f"field 'task': unknown task {self.task!r}")
        if self.algorithm not in ALGORITHMS:
            raise ConfigError(
                f"field 'algorithm': unknown algorithm {self.algorithm!r}"
            )
        if self.n_generations < 0:
            raise ConfigError("field 'n_generations': must be >= 0")
        if self.cadence < 1:
            raise ConfigError("field 'cadence': must be >= 1")
        if self.workers < 1:
            raise ConfigError("field 'workers': must be >= 1")
        for key in ("low", "high", "cells_per_dim"):
            if key not in self.archive:
                raise ConfigError(f"field 'archive.{key}': missing")

    def grid_spec(self) -> GridSpec:
        return GridSpec(
            bounds=BoundedBox(
                np.array(self.archive["low"], dtype=float),
                np.array(self.archive["high"], dtype=float),
            ),
            cells_per_dim=np.array(self.archive["cells_per_dim"], dtype=int),
        )

    def as_dict(self) -> dict:
        return {
            "task": self.task,
            "task_params": self.task_params,
            "algorithm": self.algorithm,
            "algo_params": self.algo_params,
            "archive": self.archive,
            "n_generations": self.n_generations,
            "seed": self.seed,
            "cadence": self.cadence,
            "workers": self.workers,
            "snapshot_cadence": self.snapshot_cadence,
        }

    def run_id(self) -> str:
        payload = {k: v for k, v in self.as_dict().items() if k != "workers"}
        digest = hashlib.sha256(
            json.dumps(payload, sort_keys=True).encode()
        ).hexdigest()[:10]
        return f"{digest}_s{self.seed}"


# -- algorithm configuration builders ---------------------------------------


def _es_config(params: dict) -> ESConfig:
    return ESConfig(**params)


def _novelty_config(params: dict) -> NoveltyConfig:
    return NoveltyConfig(**params)


def _multi_es_config(params: dict, add_all: bool = False) -> MultiEsConfig:
    params = dict(params)
    es = _es_config(params.pop("es", {}))
    nov = _novelty_config(params.pop("novelty", {}))
    ga = IsoLineConfig(**params.pop("ga_explore", {}))
    if add_all:
        params["add_all_samples"] = True
    return MultiEsConfig(es=es, novelty=nov, ga_explore=ga, **params)


def _run_multi_es(task, grid, params, n_generations, seed, workers, cb, add_all=False):
    cfg = _multi_es_config(params, add_all)
    archive, reports = run_multi_es(
        cfg, task, grid, n_generations, seed, workers, cb
    )
    return archive, reports, cfg.n_emitters


def _run_multi_es_sequential(task, grid, params, n_generations, seed, workers, cb):
    cfg = _multi_es_config(params)
    archive, reports = run_multi_es_sequential(
        task, grid, cfg, n_generations, seed, workers, cb
    )
    return archive, reports, cfg.n_emitters


def _run_me(task, grid, params, n_generations, seed, workers, cb):
    cfg = IsoLineConfig(**params)
    archive, reports = run_me(task, grid, cfg, n_generations, seed, cb)
    return archive, reports, cfg.batch_size


def _run_me_sampling(task, grid, params, n_generations, seed, workers, cb):
    params = dict(params)
    n_reevals = params.pop("n_reevals", 32)
    cfg = IsoLineConfig(**params)
    archive, reports = run_me_sampling(
        task, grid, cfg, n_reevals, n_generations, seed, cb
    )
    return archive, reports, cfg.batch_size


def _run_me_es(task, grid, params, n_generations, seed, workers, cb):
    params = dict(params)
    es = _es_config(params.pop("es", {}))
    nov = _novelty_config(params.pop("novelty", {}))
    cfg = MeEsConfig(es=es, novelty=nov, **params)
    archive, reports = run_me_es(task, grid, cfg, n_generations, seed, cb)
    return archive, reports, 1


def _make_es_family_runner(variant: str):
    def runner(task, grid, params, n_generations, seed, workers, cb):
        params = dict(params)
        base = default_es_family_config(variant)
        es = _es_config(params.pop("es", {}))
        nov = _novelty_config(params.pop("novelty", {}))
        merged = {
            "meta_population": base.meta_population,
            "fitness_weight": base.fitness_weight,
            **params,
        }
        cfg = EsFamilyConfig(es=es, novelty=nov, **merged)
        archive, reports = run_es_family(
            task, grid, variant, cfg, n_generations, seed, cb
        )
        return archive, reports, cfg.meta_population

    return runner


ALGORITHMS = {
    "multi_es": _run_multi_es,
    "multi_es_all": lambda *a: _run_multi_es(*a, add_all=True),
    "multi_es_sequential": _run_multi_es_sequential,
    "me": _run_me,
    "me_sampling": _run_me_sampling,
    "me_es": _run_me_es,
    "es": _make_es_family_runner("es"),
    "ns_es": _make_es_family_runner("ns_es"),
    "nsr_es": _make_es_family_runner("nsr_es"),
    "nsra_es": _make_es_family_runner("nsra_es"),
}


# -- metric row assembly -----------------------------------------------------


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def metrics_row(g, evaluations, archive, records, grid, fitness_offset) -> dict:
    m = archive_metrics(archive, fitness_offset)
    row = {
        "generation": g,
        "evaluations": evaluations,
        "qd_score": m.qd_score,
        "coverage": m.coverage,
        "max_fitness": m.max_fitness,
        "occupied_cells": m.occupied_cells,
        "exploit_added": 0,
        "explore_added": 0,
        "exploit_mean_lifespan": None,
        "explore_mean_lifespan": None,
        "dist_median": None,
        "dist_q25": None,
        "dist_q75": None,
    }
    if records:
        for mode, added_key, life_key in (
            (EXPLOIT, "exploit_added", "exploit_mean_lifespan"),
            (EXPLORE, "explore_added", "explore_mean_lifespan"),
        ):
            rows = [r for r in records if r.mode == mode]
            if rows:
                row[added_key] = sum(r.added for r in rows)
                row[life_key] = float(np.mean([r.lifespan for r in rows]))
        dists = parent_offspring_distances(records, grid)
        if dists.size:
            row["dist_median"] = float(np.median(dists))
            row["dist_q25"] = float(np.percentile(dists, 25))
            row["dist_q75"] = float(np.percentile(dists, 75))
    return row


def output_root(config: RunConfig) -> Path:
    return Path(os.environ.get(OUTPUT_ROOT_ENV, config.output_dir))


def run_experiment(config: RunConfig) -> Path:
    """Execute one run and persist metrics.csv, archive snapshots and
    summary.json under <output root>/<run-id>/."""
    config.validate()
    task = make_task(config.task, config.task_params)
    grid = config.grid_spec()
    run_dir = output_root(config) / config.run_id()
    run_dir.mkdir(parents=True, exist_ok=True)

    rows: list[dict] = []
    state = {"evaluations": 0, "seeded": False}

    def on_generation(g, archive, records):
        if records is None:
            state["seeded"] = True
        else:
            state["evaluations"] += sum(r.evaluations for r in records)
        if g % config.cadence == 0 or g == config.n_generations:
            rows.append(
                metrics_row(
                    g,
                    state["evaluations"],
                    archive,
                    records,
                    grid,
                    task.spec.fitness_offset,
                )
            )
        if (
            config.snapshot_cadence > 0
            and g > 0
            and g % config.snapshot_cadence == 0
        ):
            archive.save(run_dir / f"archive_gen{g:05d}.json")

    status = "complete"
    error = None
    archive = None
    reports = []
    try:
        runner = ALGORITHMS[config.algorithm]
        archive, reports, seed_count = runner(
            task,
            grid,
            config.algo_params,
            config.n_generations,
            config.seed,
            config.workers,
            on_generation,
        )
        state["evaluations"] += seed_count  # seeding evaluations
        # seeding evals were not known inside the callback; rebuild the
        # evaluations column to include them
        for row in rows:
            row["evaluations"] += seed_count
    except Exception as exc:  # noqa: BLE001 - summary must record the failure
        status = "incomplete"
        error = f"{type(exc).__name__}: {exc}"

    with open(run_dir / "metrics.csv", "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(METRICS_COLUMNS)
        for row in rows:
            writer.writerow([_fmt(row[c]) for c in METRICS_COLUMNS])

    if archive is not None:
        archive.save(run_dir / "archive_final.json")
        final = archive_metrics(archive, task.spec.fitness_offset).as_dict()
        lifespans = emitter_lifespans(reports)
    else:
        final = None
        lifespans = {}

    summary = {
        "run_id": config.run_id(),
        "status": status,
        "error": error,
        "config": config.as_dict(),
        "fitness_offset": task.spec.fitness_offset,
        "total_evaluations": state["evaluations"],
        "final_metrics": final,
        "mean_lifespans": lifespans,
    }
    with open(run_dir / "summary.json", "w", encoding="utf-8") as f:
        json.dump(summary, f, indent=1)
    if status != "complete":
        raise RuntimeError(f"run {config.run_id()} failed: {error}")
    return run_dir


def correct_archive_file(
    snapshot_path,
    task_name: str,
    m: int,
    seed: int,
    task_params: dict | None = None,
    out_dir=None,
) -> Path:
    """Load an archive snapshot, rebuild it from m-sample mean re-evaluations
    and write archive_corrected.json + correction_report.json."""
    snapshot_path = Path(snapshot_path)
    archive = EliteArchive.load(snapshot_path)
    task = make_task(task_name, task_params)
    if archive.spec.dim != task.spec.feature_bounds.dim:
        raise ValueError("archive grid does not match the task's feature space")
    fresh, report = corrected_archive(archive, task, m=m, seed=seed)
    out = Path(out_dir) if out_dir else snapshot_path.parent
    out.mkdir(parents=True, exist_ok=True)
    fresh.save(out / "archive_corrected.json")
    with open(out / "correction_report.json", "w", encoding="utf-8") as f:
        json.dump(
            {"task": task_name, "m": m, "seed": seed, **report.as_dict()},
            f,
            indent=1,
        )
    return out


def set_by_path(data: dict, dotted: str, value) -> None:
    keys = dotted.split(".")
    node = data
    for key in keys[:-1]:
        node = node.setdefault(key, {})
    node[keys[-1]] = value


SWEEP_COLUMNS = [
    "param",
    "value",
    "run_id",
    "status",
    "qd_score",
    "coverage",
    "max_fitness",
    "occupied_cells",
    "total_evaluations",
]


def sweep(template: RunConfig, param: str, values: list, out_root=None) -> Path:
    """One run per axis value plus a collated comparison CSV.  Child failures
    are recorded and the sweep continues."""
    root = Path(out_root) if out_root else output_root(template) / "sweep"
    root.mkdir(parents=True, exist_ok=True)
    results = []
    for value in values:
        data = template.as_dict()
        data["output_dir"] = str(root)
        set_by_path(data, param, value)
        try:
            config = RunConfig.from_dict(data)
            run_dir = run_experiment(config)
            with open(run_dir / "summary.json", encoding="utf-8") as f:
                summary = json.load(f)
            final = summary["final_metrics"] or {}
            results.append(
                {
                    "param": param,
                    "value": value,
                    "run_id": summary["run_id"],
                    "status": summary["status"],
                    "qd_score": final.get("qd_score"),
                    "coverage": final.get("coverage"),
                    "max_fitness": final.get("max_fitness"),
                    "occupied_cells": final.get("occupied_cells"),
                    "total_evaluations": summary["total_evaluations"],
                }
            )
        except Exception as exc:  # noqa: BLE001 - record and continue
            results.append(
                {
                    "param": param,
                    "value": value,
                    "run_id": "",
                    "status": f"failed: {type(exc).__name__}: {exc}",
                    "qd_score": None,
                    "coverage": None,
                    "max_fitness": None,
                    "occupied_cells": None,
                    "total_evaluations": None,
                }
            )
    out_csv = root / "sweep_summary.csv"
    with open(out_csv, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(SWEEP_COLUMNS)
        for row in results:
            writer.writerow([_fmt(row[c]) for c in SWEEP_COLUMNS])
    return out_csv
