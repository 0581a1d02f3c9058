"""Readers for the harness output files.

All loaders work from the documented file formats only: metrics.csv (header
row, repr-precision floats, blank for missing), archive snapshots
(self-describing JSON with "grid" and "cells"), summary.json,
sweep_summary.csv and correction_report.json.
"""
from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np


class InputError(ValueError):
    """Raised for missing files, unparseable inputs or absent columns; the
    message names the offending file and, where relevant, the column."""


def _check_exists(path: Path) -> Path:
    path = Path(path)
    if not path.is_file():
        raise InputError(f"input file not found: {path}")
    return path


def run_id_for(path) -> str:
    """The run-id a harness output file belongs to: its directory name."""
    return Path(path).resolve().parent.name


def load_metrics(path) -> dict[str, np.ndarray]:
    """metrics.csv as a column-name -> float array mapping (blank -> NaN)."""
    path = _check_exists(path)
    with open(path, newline="", encoding="utf-8") as f:
        reader = csv.DictReader(f)
        if reader.fieldnames is None:
            raise InputError(f"{path} has no header row")
        rows = list(reader)
    columns = {}
    for name in reader.fieldnames:
        columns[name] = np.array(
            [float(r[name]) if r[name] != "" else np.nan for r in rows]
        )
    return columns


def metric_column(columns: dict[str, np.ndarray], name: str, path) -> np.ndarray:
    if name not in columns:
        raise InputError(f"missing column {name!r} in {path}")
    return columns[name]


def load_archive(path) -> dict:
    """Archive snapshot JSON; validates the documented shape."""
    path = _check_exists(path)
    with open(path, encoding="utf-8") as f:
        data = json.load(f)
    for key in ("grid", "cells"):
        if key not in data:
            raise InputError(f"missing key {key!r} in {path}")
    for key in ("low", "high", "cells_per_dim"):
        if key not in data["grid"]:
            raise InputError(f"missing key 'grid.{key}' in {path}")
    return data


def load_json(path) -> dict:
    path = _check_exists(path)
    with open(path, encoding="utf-8") as f:
        return json.load(f)


def load_sweep(path) -> list[dict]:
    """sweep_summary.csv rows as dicts (strings preserved)."""
    path = _check_exists(path)
    with open(path, newline="", encoding="utf-8") as f:
        rows = list(csv.DictReader(f))
    if not rows:
        raise InputError(f"{path} holds no sweep rows")
    return rows
