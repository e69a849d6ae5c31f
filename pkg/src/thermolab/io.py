"""Plain-text file formats: profiles, snapshots, energy series and reports.

Every float is written with 17 significant digits so that reading a file
back reproduces the binary values exactly.  Data files carry no timestamps;
wall-clock metadata goes to a separate manifest.
"""

from __future__ import annotations

import json
import math
import platform
import time
from pathlib import Path

import numpy as np

from .energy import SERIES_COLUMNS, EnergyRecord
from .grid import Grid
from .integrator import State
from .model import PhysParams, WaveSpec
from .wave import WaveProfile

__all__ = [
    "fmt",
    "write_profile",
    "read_profile",
    "write_snapshot",
    "read_snapshot",
    "write_series",
    "read_series",
    "write_report",
    "write_convergence",
    "write_manifest",
]

SNAPSHOT_MAGIC = "# thermolab snapshot"


def fmt(value) -> str:
    return format(float(value), ".17g")


def _header(pairs: dict) -> list[str]:
    return [f"# {k} = {v}" for k, v in pairs.items()]


def _parse_header(lines) -> dict:
    meta = {}
    for line in lines:
        if not line.startswith("#") or "=" not in line:
            continue
        key, _, value = line[1:].partition("=")
        meta[key.strip()] = value.strip()
    return meta


def _spec_params(spec: WaveSpec, p: PhysParams) -> dict:
    out = {k: fmt(v) for k, v in p.as_dict().items()}
    out.update(u_minus=fmt(spec.u_minus), u_plus=fmt(spec.u_plus), s=fmt(spec.s))
    return out


def write_profile(path, profile: WaveProfile) -> Path:
    path = Path(path)
    head = _spec_params(profile.spec, profile.params)
    head.update(M_U=fmt(profile.M_U), K_W=fmt(profile.K_W), K_S0=fmt(profile.K_S0), residual=fmt(profile.residual))
    lines = ["# thermolab profile", *_header(head), "xi,w,w_prime"]
    lines += [f"{fmt(a)},{fmt(b)},{fmt(c)}" for a, b, c in zip(profile.xi, profile.w, profile.w_prime)]
    path.write_text("\n".join(lines) + "\n")
    return path


def read_profile(path) -> tuple[dict, np.ndarray]:
    text = Path(path).read_text().splitlines()
    meta = _parse_header(text)
    body = [ln for ln in text if ln and not ln.startswith("#")][1:]
    data = np.array([[float(v) for v in ln.split(",")] for ln in body], dtype=float).reshape(-1, 3)
    return meta, data


def write_snapshot(path, state: State, grid: Grid, p: PhysParams, spec: WaveSpec, dt: float) -> Path:
    path = Path(path)
    head = {"t": fmt(state.t), "step": state.step, "dt": fmt(dt), "L": fmt(grid.L), "n": grid.n}
    head.update(_spec_params(spec, p))
    lines = [SNAPSHOT_MAGIC, *_header(head), "x,rho,rho_t,theta_pert"]
    lines += [
        f"{fmt(x)},{fmt(a)},{fmt(b)},{fmt(c)}"
        for x, a, b, c in zip(grid.x, state.rho, state.rho_t, state.theta_pert)
    ]
    path.write_text("\n".join(lines) + "\n")
    return path


def read_snapshot(path) -> tuple[State, dict]:
    """Load a snapshot; ``meta`` holds the header with numeric fields converted."""
    lines = Path(path).read_text().splitlines()
    if not lines or lines[0] != SNAPSHOT_MAGIC:
        raise ValueError(f"{path}: not a thermolab snapshot")
    raw = _parse_header(lines)
    meta = {k: (int(v) if k in ("step", "n") else float(v)) for k, v in raw.items()}
    body = [ln for ln in lines if ln and not ln.startswith("#")][1:]
    data = np.array([[float(v) for v in ln.split(",")] for ln in body], dtype=float).reshape(-1, 4)
    if data.shape[0] != meta["n"]:
        raise ValueError(f"{path}: header says n = {meta['n']}, body has {data.shape[0]} rows")
    state = State(meta["t"], data[:, 1].copy(), data[:, 2].copy(), data[:, 3].copy(), meta["step"])
    return state, meta


def _series_line(rec: EnergyRecord) -> str:
    cells = [fmt(v) for v in rec.row()[:-1]]
    cells.append(str(int(rec.overflow_flag)))
    return ",".join(cells)


def write_series(path, records) -> Path:
    path = Path(path)
    lines = [",".join(SERIES_COLUMNS), *(_series_line(r) for r in records)]
    path.write_text("\n".join(lines) + "\n")
    return path


def read_series(path) -> dict[str, np.ndarray]:
    lines = [ln for ln in Path(path).read_text().splitlines() if ln.strip()]
    if not lines:
        raise ValueError(f"{path}: empty series file")
    columns = lines[0].split(",")
    missing = [c for c in SERIES_COLUMNS if c not in columns]
    if missing:
        raise ValueError(f"{path}: missing columns {missing}")
    rows = np.array([[float(v) for v in ln.split(",")] for ln in lines[1:]], dtype=float).reshape(-1, len(columns))
    return {c: rows[:, i] for i, c in enumerate(columns)}


def _json_value(v):
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if v is None:
        return None
    if isinstance(v, (int, np.integer)):
        return int(v)
    v = float(v)
    return v if math.isfinite(v) else None


def write_report(path, report: dict) -> Path:
    path = Path(path)
    clean = {k: _json_value(v) for k, v in report.items()}
    path.write_text(json.dumps(clean, indent=2, sort_keys=False) + "\n")
    return path


def _order_cell(v) -> str:
    if v is None:
        return ""
    if math.isinf(v):
        return "exact"
    return fmt(v)


def write_convergence(path, rows) -> Path:
    path = Path(path)
    lines = ["level,dx,dt,err_rho,err_theta,order_rho,order_theta"]
    for r in rows:
        lines.append(
            f"{r.level},{fmt(r.dx)},{fmt(r.dt)},{fmt(r.err_rho)},{fmt(r.err_theta)},"
            f"{_order_cell(r.order_rho)},{_order_cell(r.order_theta)}"
        )
    path.write_text("\n".join(lines) + "\n")
    return path


def write_manifest(path, command: str, config_text: str | None, files, extra: dict | None = None) -> Path:
    from . import __version__

    path = Path(path)
    doc = {
        "command": command,
        "version": __version__,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "created": time.strftime("%Y-%m-%dT%H:%M:%S%z"),
        "files": sorted(str(f) for f in files),
        "config": config_text,
    }
    if extra:
        doc.update({k: _json_value(v) if not isinstance(v, (str, list, dict)) else v for k, v in extra.items()})
    path.write_text(json.dumps(doc, indent=2) + "\n")
    return path
