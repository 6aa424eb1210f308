"""Deterministic CSV/JSON emission shared by the library and the CLI.

Floats are written with repr (shortest round-trip form), which is identical
for identical IEEE doubles, so re-running a config reproduces files byte for
byte.
"""
from __future__ import annotations

import csv
import json
import math
from pathlib import Path


def fmt(value) -> str:
    """Canonical cell text for CSV output."""
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        return repr(value)
    return str(value)


def write_csv(path, header, rows) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="\n", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([fmt(v) for v in row])


def write_json(path, payload) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")


def spectrum_rows(curve):
    """(gamma, level_index, energy, residual) rows, grid-major."""
    for i, gamma in enumerate(curve.gammas):
        for level in range(curve.k):
            yield (
                float(gamma),
                level,
                float(curve.levels[i, level]),
                float(curve.residuals[i, level]),
            )


def write_spectrum_csv(curve, path) -> None:
    write_csv(path, ["gamma", "level_index", "energy", "residual"], spectrum_rows(curve))


def write_scaling_csv(result, path) -> None:
    rows = [
        (r.n, r.sample, r.seed, r.e0, r.gamma_star, r.delta_min)
        for r in result.records
        if r.ok
    ]
    write_csv(path, ["n", "sample", "seed", "e0", "gamma_star", "delta_min"], rows)


def write_anneal_csv(entries, path) -> None:
    """entries: iterable of (n, seed, AnnealResult)."""
    rows = [
        (n, seed, res.schedule.tau, res.dt, res.fidelity, res.norm_drift)
        for n, seed, res in entries
    ]
    write_csv(path, ["n", "seed", "tau", "dt", "fidelity", "norm_drift"], rows)


def write_checkpoints_csv(checkpoints, path) -> None:
    write_csv(path, ["t", "gamma", "fidelity"], checkpoints)
