"""Figure rendering from harness output files.

Every figure kind is a pure function of its input files: rendering never
writes to the inputs, and the same inputs produce the same figure.  Each
figure embeds the source run-ids in a caption line.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .io import (
    InputError,
    load_archive,
    load_json,
    load_metrics,
    load_sweep,
    metric_column,
    run_id_for,
)

KINDS = ("heatmap", "convergence", "ablation_bars", "loss_bars", "distance_curve")

SUMMARY_METRICS = ("qd_score", "coverage", "max_fitness", "occupied_cells")


@dataclass(frozen=True)
class FigureRequest:
    kind: str
    inputs: tuple[str, ...]
    output: str
    metric: str = "qd_score"
    title: str = ""
    labels: tuple[str, ...] = field(default=())

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InputError(f"unknown figure kind {self.kind!r}")
        if not self.inputs:
            raise InputError("figure request needs at least one input file")
        if self.labels and len(self.labels) != len(self.inputs):
            raise InputError("labels must match inputs one-to-one")


# -- data extraction (kept separate from drawing so it can be tested) --------


def heatmap_grid(archive: dict) -> np.ndarray:
    """Occupant fitness on the archive's grid; NaN marks empty cells.
    Only 2-D feature grids can be drawn as heatmaps."""
    cells_per_dim = archive["grid"]["cells_per_dim"]
    if len(cells_per_dim) != 2:
        raise InputError(
            f"heatmap needs a 2-D archive grid, got {len(cells_per_dim)} dims"
        )
    grid = np.full(tuple(cells_per_dim), np.nan)
    for cell in archive["cells"]:
        i, j = cell["index"]
        grid[i, j] = cell["fitness"]
    return grid


def convergence_table(
    paths, metric: str
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Per-generation median and quartiles of one metric across seed runs.

    All runs must report the same generation schedule.  Returns
    (generations, median, q25, q75); with a single run the band collapses
    onto the line.
    """
    generations = None
    series = []
    for path in paths:
        columns = load_metrics(path)
        gens = metric_column(columns, "generation", path)
        values = metric_column(columns, metric, path)
        if generations is None:
            generations = gens
        elif not np.array_equal(generations, gens):
            raise InputError(f"generation schedule of {path} differs across runs")
        series.append(values)
    stacked = np.stack(series)
    return (
        generations,
        np.median(stacked, axis=0),
        np.percentile(stacked, 25, axis=0),
        np.percentile(stacked, 75, axis=0),
    )


# -- drawing ------------------------------------------------------------------


def _caption(fig, paths) -> None:
    run_ids = ", ".join(dict.fromkeys(run_id_for(p) for p in paths))
    fig.text(0.01, 0.005, f"runs: {run_ids}", fontsize=6, ha="left", va="bottom")


def _labels(request: FigureRequest) -> list[str]:
    if request.labels:
        return list(request.labels)
    return [run_id_for(p) for p in request.inputs]


def _render_heatmap(request: FigureRequest, fig, ax) -> None:
    archive = load_archive(request.inputs[0])
    grid = heatmap_grid(archive)
    low = archive["grid"]["low"]
    high = archive["grid"]["high"]
    mesh = ax.imshow(
        grid.T,
        origin="lower",
        extent=(low[0], high[0], low[1], high[1]),
        aspect="auto",
        interpolation="nearest",
    )
    if np.all(np.isnan(grid)):
        ax.text(0.5, 0.5, "empty archive", transform=ax.transAxes, ha="center")
    else:
        fig.colorbar(mesh, ax=ax, label="fitness")
    ax.set_xlabel("feature 1")
    ax.set_ylabel("feature 2")


def _render_convergence(request: FigureRequest, fig, ax) -> None:
    gens, med, q25, q75 = convergence_table(request.inputs, request.metric)
    ax.plot(gens, med, label="median")
    ax.fill_between(gens, q25, q75, alpha=0.3, label="quartiles")
    ax.set_xlabel("generation")
    ax.set_ylabel(request.metric)
    ax.legend()


def _render_ablation_bars(request: FigureRequest, fig, ax) -> None:
    path = request.inputs[0]
    rows = load_sweep(path)
    if request.metric not in rows[0]:
        raise InputError(f"missing column {request.metric!r} in {path}")
    complete = [r for r in rows if r["status"] == "complete"]
    if not complete:
        raise InputError(f"{path} holds no complete runs")
    labels = [r["value"] for r in complete]
    heights = [float(r[request.metric]) for r in complete]
    ax.bar(range(len(complete)), heights)
    ax.set_xticks(range(len(complete)), labels)
    ax.set_xlabel(complete[0]["param"])
    ax.set_ylabel(request.metric)


def _render_loss_bars(request: FigureRequest, fig, ax) -> None:
    metrics = ("qd_score", "coverage", "max_fitness")
    labels = _labels(request)
    width = 0.8 / len(request.inputs)
    base = np.arange(len(metrics))
    for i, (path, label) in enumerate(zip(request.inputs, labels)):
        report = load_json(path)
        if "loss_pct" not in report:
            raise InputError(f"missing key 'loss_pct' in {path}")
        heights = [report["loss_pct"][m] for m in metrics]
        ax.bar(base + i * width, heights, width=width, label=label)
    ax.set_xticks(base + 0.4 - width / 2, metrics)
    ax.set_ylabel("loss (%)")
    ax.legend()


def _render_distance_curve(request: FigureRequest, fig, ax) -> None:
    for path, label in zip(request.inputs, _labels(request)):
        columns = load_metrics(path)
        gens = metric_column(columns, "generation", path)
        med = metric_column(columns, "dist_median", path)
        q25 = metric_column(columns, "dist_q25", path)
        q75 = metric_column(columns, "dist_q75", path)
        keep = ~np.isnan(med)
        (line,) = ax.plot(gens[keep], med[keep], label=label)
        ax.fill_between(
            gens[keep], q25[keep], q75[keep], alpha=0.3, color=line.get_color()
        )
    ax.set_xlabel("generation")
    ax.set_ylabel("parent-offspring distance (cell widths)")
    ax.legend()


_RENDERERS = {
    "heatmap": _render_heatmap,
    "convergence": _render_convergence,
    "ablation_bars": _render_ablation_bars,
    "loss_bars": _render_loss_bars,
    "distance_curve": _render_distance_curve,
}


def render(request: FigureRequest) -> Path:
    """Render one figure to request.output and return its path."""
    fig, ax = plt.subplots(figsize=(6, 4.5))
    try:
        _RENDERERS[request.kind](request, fig, ax)
        if request.title:
            ax.set_title(request.title)
        _caption(fig, request.inputs)
        out = Path(request.output)
        out.parent.mkdir(parents=True, exist_ok=True)
        fig.savefig(out, dpi=120)
    finally:
        plt.close(fig)
    return out
