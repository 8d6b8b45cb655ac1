"""Snapshot and diagnostics CSV files, metadata sidecars and CSV comparison."""
from __future__ import annotations

import csv
import json
import subprocess
from importlib import metadata
from pathlib import Path

import numpy as np

from .diagnostics import DiagnosticsRecord, conserved_totals
from .models import recover_primitives

SNAPSHOT_COLUMNS = ("x", "rho", "u", "E", "eps")


class CsvFormatError(ValueError):
    """Malformed or mismatched CSV input."""


def _fmt(v):
    return format(float(v), ".17g")


def version_string():
    """``<package version>[+<git describe>]``, the latter when run from a checkout."""
    try:
        base = metadata.version("artifact")
    except metadata.PackageNotFoundError:
        base = "0+unknown"
    try:
        desc = subprocess.run(
            ["git", "describe", "--always", "--dirty", "--tags"],
            cwd=Path(__file__).resolve().parent, capture_output=True, text=True, timeout=5,
        ).stdout.strip()
    except (OSError, subprocess.SubprocessError):
        desc = ""
    return f"{base}+{desc}" if desc else base


def snapshot_columns(state, model):
    """Cell-centre values ``(x, rho, u, E, eps)`` of ``state``."""
    prim = recover_primitives(state, model)
    rho = state.rho.at_centers()
    return {
        "x": state.mesh.cell_centers,
        "rho": rho,
        "u": state.mom.at_centers() / rho,
        "E": state.energy.at_centers(),
        "eps": prim.eps.at_centers(),
    }


def write_snapshot(state, model, path, config=None):
    """Write ``x,rho,u,E,eps`` rows plus a ``<path>.meta.json`` sidecar."""
    path = Path(path)
    cols = snapshot_columns(state, model)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SNAPSHOT_COLUMNS)
        for row in zip(*(cols[c] for c in SNAPSHOT_COLUMNS)):
            w.writerow([_fmt(v) for v in row])
    mass, mom, energy = conserved_totals(state)
    meta = {
        "time": state.time,
        "n_cells": state.mesh.n_cells,
        "model": model.kind.value,
        "alpha": model.alpha,
        "version": version_string(),
        "totals": {"mass": mass, "momentum": mom, "energy": energy},
        "config": config.as_dict() if config is not None else None,
    }
    with open(str(path) + ".meta.json", "w", encoding="utf-8") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def read_snapshot(path):
    """Columns of a snapshot CSV as a dict of float arrays."""
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows or tuple(rows[0]) != SNAPSHOT_COLUMNS:
        raise CsvFormatError(f"{path}: header must be {','.join(SNAPSHOT_COLUMNS)}")
    body = rows[1:]
    if any(len(r) != len(SNAPSHOT_COLUMNS) for r in body):
        raise CsvFormatError(f"{path}: every row needs {len(SNAPSHOT_COLUMNS)} fields")
    try:
        data = np.array(body, dtype=float).reshape(len(body), len(SNAPSHOT_COLUMNS))
    except ValueError as exc:
        raise CsvFormatError(f"{path}: {exc}") from None
    return {c: data[:, i] for i, c in enumerate(SNAPSHOT_COLUMNS)}


def compare_csv(a_path, b_path, x_tol=1e-12):
    """Per-column ``{"L1", "L2", "Linf"}`` norms of ``b - a`` on a shared grid.

    L1 and L2 are cell-width weighted; grids must agree to ``x_tol``.
    """
    a, b = read_snapshot(a_path), read_snapshot(b_path)
    if a["x"].shape != b["x"].shape or not np.all(np.abs(a["x"] - b["x"]) <= x_tol):
        raise CsvFormatError("x columns differ")
    x = a["x"]
    h = float(x[1] - x[0]) if x.size > 1 else 1.0
    report = {}
    for c in SNAPSHOT_COLUMNS[1:]:
        d = np.abs(b[c] - a[c])
        report[c] = {
            "L1": float(h * d.sum()),
            "L2": float(np.sqrt(h * np.sum(d**2))),
            "Linf": float(d.max()) if d.size else 0.0,
        }
    return report


def write_diagnostics(records, path):
    """One CSV row per :class:`DiagnosticsRecord`."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(DiagnosticsRecord.columns())
        for r in records:
            w.writerow([_fmt(v) for v in r.as_row()])
    return Path(path)
