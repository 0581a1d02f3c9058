import csv
import hashlib
import json

import numpy as np
import pytest

from esqd_plots import (
    FigureRequest,
    InputError,
    convergence_table,
    heatmap_grid,
    render,
)
from esqd_plots.checks import run_acceptance_checks
from esqd_plots.cli import main


def write_archive(path, cells_per_dim, occupied):
    data = {
        "grid": {
            "low": [0.0, 0.0],
            "high": [1.0, 1.0],
            "cells_per_dim": list(cells_per_dim),
        },
        "cells": [
            {
                "index": [i, j],
                "genome": [0.0],
                "fitness": float(i * 10 + j),
                "feature": [
                    (i + 0.5) / cells_per_dim[0],
                    (j + 0.5) / cells_per_dim[1],
                ],
            }
            for i, j in occupied
        ],
    }
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(data), encoding="utf-8")
    return path


def write_metrics(path, rows, columns=("generation", "qd_score")):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(columns)
        writer.writerows(rows)
    return path


class TestHeatmap:
    @pytest.mark.parametrize(
        "dims,occupied",
        [
            ((3, 3), [(0, 0), (2, 1)]),
            ((6, 4), [(i, j) for i in range(6) for j in range(4)]),
            ((5, 5), []),
        ],
    )
    def test_cell_count_matches_archive_rows(self, tmp_path, dims, occupied):
        path = write_archive(tmp_path / "run" / "archive_final.json", dims, occupied)
        grid = heatmap_grid(json.loads(path.read_text()))
        assert grid.shape == dims
        assert int(np.count_nonzero(~np.isnan(grid))) == len(occupied)

    def test_two_occupants_draw_two_cells(self, tmp_path):
        path = write_archive(tmp_path / "r" / "a.json", (4, 4), [(1, 1), (3, 0)])
        grid = heatmap_grid(json.loads(path.read_text()))
        assert int(np.count_nonzero(~np.isnan(grid))) == 2
        out = render(
            FigureRequest("heatmap", (str(path),), str(tmp_path / "h.png"))
        )
        assert out.exists() and out.stat().st_size > 0

    def test_fitness_lands_in_declared_cell(self, tmp_path):
        path = write_archive(tmp_path / "r" / "a.json", (4, 4), [(2, 3)])
        grid = heatmap_grid(json.loads(path.read_text()))
        assert grid[2, 3] == 23.0

    def test_empty_archive_renders_annotated_blank(self, tmp_path):
        path = write_archive(tmp_path / "r" / "a.json", (4, 4), [])
        out = render(
            FigureRequest("heatmap", (str(path),), str(tmp_path / "h.png"))
        )
        assert out.exists()

    def test_non_2d_grid_rejected(self, tmp_path):
        data = {
            "grid": {"low": [0.0], "high": [1.0], "cells_per_dim": [4]},
            "cells": [],
        }
        path = tmp_path / "a.json"
        path.write_text(json.dumps(data))
        with pytest.raises(InputError, match="2-D"):
            render(FigureRequest("heatmap", (str(path),), str(tmp_path / "h.png")))


class TestConvergence:
    def make_seed_runs(self, tmp_path, n_seeds=5, gens=(0, 5, 10)):
        paths = []
        for s in range(n_seeds):
            rows = [[g, repr(float(100 * g + s))] for g in gens]
            paths.append(
                str(write_metrics(tmp_path / f"run_s{s}" / "metrics.csv", rows))
            )
        return paths

    def test_bands_match_percentile_table(self, tmp_path):
        paths = self.make_seed_runs(tmp_path)
        gens, med, q25, q75 = convergence_table(paths, "qd_score")
        # per generation the 5 seed values are {100g, ..., 100g+4}
        assert np.array_equal(gens, [0, 5, 10])
        assert np.array_equal(med, [2.0, 502.0, 1002.0])
        assert np.array_equal(q25, [1.0, 501.0, 1001.0])
        assert np.array_equal(q75, [3.0, 503.0, 1003.0])

    def test_single_seed_band_collapses_to_line(self, tmp_path):
        paths = self.make_seed_runs(tmp_path, n_seeds=1)
        _, med, q25, q75 = convergence_table(paths, "qd_score")
        assert np.array_equal(med, q25) and np.array_equal(med, q75)

    def test_missing_column_named(self, tmp_path):
        paths = self.make_seed_runs(tmp_path, n_seeds=2)
        with pytest.raises(InputError, match="coverage"):
            convergence_table(paths, "coverage")

    def test_mismatched_generations_rejected(self, tmp_path):
        a = write_metrics(tmp_path / "a" / "m.csv", [[0, "1.0"], [5, "2.0"]])
        b = write_metrics(tmp_path / "b" / "m.csv", [[0, "1.0"], [6, "2.0"]])
        with pytest.raises(InputError, match="generation schedule"):
            convergence_table([str(a), str(b)], "qd_score")

    def test_render_writes_figure(self, tmp_path):
        paths = self.make_seed_runs(tmp_path)
        out = render(
            FigureRequest(
                "convergence", tuple(paths), str(tmp_path / "c.png"), title="arm"
            )
        )
        assert out.exists() and out.stat().st_size > 0


class TestOtherFigures:
    def test_ablation_bars(self, tmp_path):
        path = tmp_path / "sweep" / "sweep_summary.csv"
        path.parent.mkdir()
        with open(path, "w", newline="") as f:
            writer = csv.writer(f)
            writer.writerow(
                ["param", "value", "run_id", "status", "qd_score", "coverage",
                 "max_fitness", "occupied_cells", "total_evaluations"]
            )
            writer.writerow(
                ["algo_params.batch_size", "4", "x_s0", "complete", "10.0",
                 "0.5", "0.9", "50", "100"]
            )
            writer.writerow(
                ["algo_params.batch_size", "8", "y_s0", "complete", "12.0",
                 "0.6", "0.95", "60", "200"]
            )
        out = render(
            FigureRequest("ablation_bars", (str(path),), str(tmp_path / "b.png"))
        )
        assert out.exists()

    def test_loss_bars(self, tmp_path):
        paths = []
        for name, loss in (("memes", 5.0), ("me", 12.0)):
            p = tmp_path / name / "correction_report.json"
            p.parent.mkdir()
            p.write_text(
                json.dumps(
                    {
                        "loss_pct": {
                            "qd_score": loss,
                            "coverage": loss / 2,
                            "max_fitness": loss / 4,
                        }
                    }
                )
            )
            paths.append(str(p))
        out = render(
            FigureRequest(
                "loss_bars", tuple(paths), str(tmp_path / "l.png"),
                labels=("multi_es", "me"),
            )
        )
        assert out.exists()

    def test_distance_curve_skips_blank_rows(self, tmp_path):
        cols = ("generation", "dist_median", "dist_q25", "dist_q75")
        rows = [[0, "", "", ""], [5, "1.5", "1.0", "2.0"], [10, "1.2", "0.9", "1.6"]]
        path = write_metrics(tmp_path / "r" / "metrics.csv", rows, columns=cols)
        out = render(
            FigureRequest("distance_curve", (str(path),), str(tmp_path / "d.png"))
        )
        assert out.exists()


class TestReadOnlyAndRequests:
    def test_rendering_leaves_inputs_checksum_identical(self, tmp_path):
        arch = write_archive(tmp_path / "r" / "a.json", (4, 4), [(0, 0)])
        rows = [[g, repr(float(g))] for g in (0, 5)]
        metrics = write_metrics(tmp_path / "r" / "metrics.csv", rows)
        before = {
            p: hashlib.sha256(p.read_bytes()).hexdigest() for p in (arch, metrics)
        }
        render(FigureRequest("heatmap", (str(arch),), str(tmp_path / "h.png")))
        render(
            FigureRequest("convergence", (str(metrics),), str(tmp_path / "c.png"))
        )
        after = {
            p: hashlib.sha256(p.read_bytes()).hexdigest() for p in (arch, metrics)
        }
        assert before == after

    def test_unknown_kind_rejected(self, tmp_path):
        with pytest.raises(InputError, match="kind"):
            FigureRequest("pie", ("x",), str(tmp_path / "p.png"))

    def test_missing_input_named(self, tmp_path):
        with pytest.raises(InputError, match="not found"):
            render(
                FigureRequest(
                    "heatmap",
                    (str(tmp_path / "missing.json"),),
                    str(tmp_path / "h.png"),
                )
            )

    def test_label_count_must_match_inputs(self, tmp_path):
        with pytest.raises(InputError, match="labels"):
            FigureRequest("loss_bars", ("a", "b"), "o.png", labels=("one",))


class TestCli:
    def test_heatmap_subcommand(self, tmp_path, capsys):
        arch = write_archive(tmp_path / "r" / "a.json", (3, 3), [(0, 0)])
        out = tmp_path / "h.png"
        assert main(["heatmap", str(arch), "--out", str(out)]) == 0
        assert out.exists()
        assert str(out) in capsys.readouterr().out

    def test_bad_input_exits_2(self, tmp_path, capsys):
        rc = main(["heatmap", str(tmp_path / "no.json"), "--out", "h.png"])
        assert rc == 2
        assert "not found" in capsys.readouterr().err


def test_acceptance_checks_pass():
    result = run_acceptance_checks()
    assert result["passed"], result["detail"]
    assert isinstance(result["detail"], str) and result["detail"]
