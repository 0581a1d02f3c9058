"""Self-contained acceptance checks for the figure component.

Builds fixture files in a temporary directory following the documented
harness output schemas, then verifies:
  1. heatmap cell count equals archive snapshot row count (3 fixtures),
  2. convergence bands match a hand-computed percentile table (5 seed runs),
  3. rendering leaves every input file checksum-identical.
"""
from __future__ import annotations

import csv
import hashlib
import json
import tempfile
from pathlib import Path

import numpy as np

from .figures import FigureRequest, convergence_table, heatmap_grid, render
from .io import load_archive


def _write_archive(path: Path, cells_per_dim, occupied: list[tuple[int, int]]):
    data = {
        "grid": {
            "low": [0.0, 0.0],
            "high": [1.0, 1.0],
            "cells_per_dim": list(cells_per_dim),
        },
        "cells": [
            {
                "index": [i, j],
                "genome": [0.1 * i, 0.2 * j],
                "fitness": float(i + j),
                "feature": [
                    (i + 0.5) / cells_per_dim[0],
                    (j + 0.5) / cells_per_dim[1],
                ],
            }
            for i, j in occupied
        ],
    }
    path.write_text(json.dumps(data), encoding="utf-8")


def _write_metrics(path: Path, generations, values):
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(["generation", "qd_score"])
        for g, v in zip(generations, values):
            writer.writerow([g, repr(float(v))])


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def run_acceptance_checks() -> dict:
    """Returns {"passed": bool, "detail": str}."""
    failures: list[str] = []
    details: list[str] = []
    with tempfile.TemporaryDirectory() as tmp:
        root = Path(tmp)

        # 1. heatmap cell counts on 3 fixture archives ----------------------
        fixtures = [
            ("dense", (4, 4), [(i, j) for i in range(4) for j in range(4)]),
            ("sparse", (8, 8), [(0, 0), (7, 7), (3, 5)]),
            ("empty", (5, 5), []),
        ]
        counts = []
        for name, dims, occupied in fixtures:
            arch_path = root / f"{name}" / "archive_final.json"
            arch_path.parent.mkdir()
            _write_archive(arch_path, dims, occupied)
            archive = load_archive(arch_path)
            grid = heatmap_grid(archive)
            drawn = int(np.count_nonzero(~np.isnan(grid)))
            counts.append((name, drawn, len(archive["cells"])))
            render(
                FigureRequest(
                    kind="heatmap",
                    inputs=(str(arch_path),),
                    output=str(root / f"{name}_heatmap.png"),
                )
            )
        if all(drawn == rows for _, drawn, rows in counts):
            details.append(
                "heatmap cells == archive rows on 3 fixtures "
                + str([f"{n}:{d}" for n, d, _ in counts])
            )
        else:
            failures.append(f"heatmap cell counts diverge: {counts}")

        # 2. convergence bands vs hand-computed percentile table ------------
        generations = [0, 10, 20]
        metric_paths = []
        for seed in range(5):
            run_dir = root / f"fixture_s{seed}"
            run_dir.mkdir()
            path = run_dir / "metrics.csv"
            _write_metrics(path, generations, [10 * g + seed for g in generations])
            metric_paths.append(str(path))
        gens, med, q25, q75 = convergence_table(metric_paths, "qd_score")
        # values per generation are {10g, 10g+1, ..., 10g+4}: median 10g+2,
        # 25th percentile 10g+1, 75th percentile 10g+3
        expected = np.array([[10 * g + o for g in generations] for o in (2, 1, 3)])
        table_ok = (
            np.array_equal(gens, generations)
            and np.array_equal(med, expected[0])
            and np.array_equal(q25, expected[1])
            and np.array_equal(q75, expected[2])
        )
        if table_ok:
            details.append("convergence bands match the percentile table")
        else:
            failures.append(
                f"convergence bands wrong: med={med} q25={q25} q75={q75}"
            )
        render(
            FigureRequest(
                kind="convergence",
                inputs=tuple(metric_paths),
                output=str(root / "convergence.png"),
            )
        )

        # 3. rendering is read-only -----------------------------------------
        inputs = [root / n / "archive_final.json" for n, _, _ in fixtures]
        inputs += [Path(p) for p in metric_paths]
        before = {p: _sha256(p) for p in inputs}
        render(
            FigureRequest(
                kind="heatmap",
                inputs=(str(inputs[0]),),
                output=str(root / "again.png"),
            )
        )
        render(
            FigureRequest(
                kind="convergence",
                inputs=tuple(metric_paths),
                output=str(root / "again2.png"),
            )
        )
        after = {p: _sha256(p) for p in inputs}
        if before == after:
            details.append(f"{len(inputs)} input files checksum-identical")
        else:
            changed = [str(p) for p in inputs if before[p] != after[p]]
            failures.append(f"rendering modified inputs: {changed}")

    if failures:
        return {"passed": False, "detail": "; ".join(failures)}
    return {"passed": True, "detail": "; ".join(details)}
