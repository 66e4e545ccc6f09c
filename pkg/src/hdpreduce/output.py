"""Trajectory tables (CSV, 17 significant digits) and diagnostics summaries (JSON)."""
import json
import math
import os

import numpy as np

from .integrate import Trajectory

FULL_COLUMNS = (["t"] + [f"R{i}{j}" for i in range(1, 4) for j in range(1, 4)]
                + ["pi1", "pi2", "pi3", "e1", "e2", "e3", "sigma1", "sigma2", "sigma3"]
                + [f"C{i}{j}" for i in range(1, 4) for j in range(1, 4)]
                + ["gamma1", "gamma2", "gamma3"])
REDUCED_COLUMNS = FULL_COLUMNS[:19] + ["mu1", "mu2", "mu3"]
FMT = "%.17g"


def columns(kind):
    return FULL_COLUMNS if kind == "full" else REDUCED_COLUMNS


def _write_table(path, header, rows):
    with open(path, "w", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(FMT % v for v in row) + "\n")


def write_trajectory(path, traj):
    data = np.column_stack((traj.times, traj.states))
    _write_table(path, columns(traj.kind), data)


def read_trajectory(path):
    with open(path) as fh:
        header = fh.readline().strip().split(",")
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    if header == FULL_COLUMNS:
        kind = "full"
    elif header == REDUCED_COLUMNS:
        kind = "reduced"
    else:
        raise ValueError(f"{path}: unrecognized header")
    return Trajectory(kind, data[:, 0].copy(), data[:, 1:].copy(), [])


def write_diagnostic_table(path, traj):
    keys = sorted({k for d in traj.diagnostics for k in d})
    rows = [[t] + [d.get(k, math.nan) for k in keys]
            for t, d in zip(traj.times, traj.diagnostics)]
    _write_table(path, ["t"] + keys, rows)


def write_series(path, times, values, name):
    _write_table(path, ["t", name], np.column_stack((times, values)))


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def write_summary(path, summary):
    with open(path, "w") as fh:
        json.dump(_clean(summary), fh, indent=2, sort_keys=True)
        fh.write("\n")


def summarize(traj):
    """Max of every diagnostic column plus size information."""
    out = {"steps": len(traj) - 1, "t_final": float(traj.times[-1]) if len(traj) else 0.0}
    keys = sorted({k for d in traj.diagnostics for k in d})
    for k in keys:
        col = np.array([d.get(k, math.nan) for d in traj.diagnostics], dtype=float)
        if k == "energy":
            out["energy_drift"] = float(np.nanmax(np.abs(col - col[0]))) if col.size else 0.0
        elif np.isfinite(col).any():
            out[f"max_{k}"] = float(np.nanmax(np.abs(col)))
    return out


def ensure_dir(path):
    os.makedirs(path, exist_ok=True)
    return path
