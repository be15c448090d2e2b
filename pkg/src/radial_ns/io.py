"""Output formats: diagnostics CSV, snapshot text files, run manifest.

Every float is written with 17 significant digits so values survive a
text round-trip bit for bit. Nothing time- or host-dependent is written,
which keeps reruns of one configuration byte-identical.
"""
from __future__ import annotations

import csv
import hashlib
import io
import json
import math
from pathlib import Path

import numpy as np

from .diagnostics import DiagnosticsSample
from .errors import UsageError
from .grid import FluidState, RadialGrid, build_grid
from .model import effective_velocity
from .params import ModelParams

SNAPSHOT_VERSION = 1
BASE_COLUMNS = ("t", "dt", "min_rho", "max_rho", "kinetic", "potential", "bd_kinetic",
                "bd_dissipation_rate", "energy_residual", "bd_residual")


def fmt(x: float) -> str:
    return "%.17g" % x


def k_label(k: float) -> str:
    return f"{k:g}"


def diagnostics_columns(config) -> list[str]:
    d = config.diagnostics
    return (list(BASE_COLUMNS) + [f"k_moment_{k_label(k)}" for k in d.k_moments]
            + [f"wnorm_{n.tag}" for n in d.norms] + ["boundary_contamination"])


def sample_row(sample: DiagnosticsSample, config) -> list[float]:
    d = config.diagnostics
    return ([sample.time, sample.dt, sample.min_rho, sample.max_rho, sample.kinetic_energy,
             sample.potential_energy_total, sample.bd_kinetic, sample.bd_dissipation_rate,
             sample.energy_balance_residual, sample.bd_balance_residual]
            + [sample.k_moments[k] for k in d.k_moments]
            + [sample.weighted_norms[n.tag] for n in d.norms]
            + [sample.boundary_contamination])


def diagnostics_csv(samples, config) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(diagnostics_columns(config))
    for s in samples:
        writer.writerow(fmt(v) for v in sample_row(s, config))
    return buf.getvalue()


def read_diagnostics_csv(path) -> dict[str, np.ndarray]:
    """Column name -> float array."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise UsageError(f"{path} is empty")
    header, body = rows[0], rows[1:]
    data = np.array([[float(v) for v in row] for row in body]) if body else np.empty((0, len(header)))
    return {name: data[:, i] for i, name in enumerate(header)}


def snapshot_text(state: FluidState, grid: RadialGrid, params: ModelParams) -> str:
    w = effective_velocity(state.rho, state.u, grid, params)
    head = [("format_version", SNAPSHOT_VERSION), ("dim", grid.dim), ("alpha", params.alpha),
            ("gamma", params.gamma), ("pressure_coeff", params.pressure_coeff),
            ("far_density", params.far_density), ("n_cells", grid.n_cells), ("r_max", grid.r_max),
            ("t", state.time)]
    lines = [f"# {k} = {v if isinstance(v, int) else fmt(v)}" for k, v in head]
    lines.append("r,rho,u,w")
    for row in zip(grid.cell_centers, state.rho, state.u, w):
        lines.append(",".join(fmt(v) for v in row))
    return "\n".join(lines) + "\n"


def read_snapshot(path):
    """Returns (header dict, columns dict of arrays)."""
    header, rows, names = {}, [], None
    for line in Path(path).read_text().splitlines():
        if line.startswith("#"):
            key, _, value = line[1:].partition("=")
            header[key.strip()] = float(value)
        elif names is None:
            names = line.split(",")
        elif line:
            rows.append([float(v) for v in line.split(",")])
    if names is None:
        raise UsageError(f"{path} has no column header")
    if int(header.get("format_version", -1)) != SNAPSHOT_VERSION:
        raise UsageError(f"{path}: unsupported snapshot format {header.get('format_version')}")
    for key in ("format_version", "dim", "n_cells"):
        header[key] = int(header[key])
    data = np.array(rows)
    return header, {name: data[:, i] for i, name in enumerate(names)}


def snapshot_consistency(path) -> float:
    """Max |w - w(r, rho, u)| with w recomputed from the stored columns."""
    head, cols = read_snapshot(path)
    grid = build_grid(head["n_cells"], head["r_max"], head["dim"])
    if not np.allclose(cols["r"], grid.cell_centers, rtol=0, atol=1e-14 * grid.r_max):
        raise UsageError(f"{path}: radius column does not match the header grid")
    params = ModelParams(head["dim"], head["alpha"], head["gamma"], head["pressure_coeff"], head["far_density"])
    w = effective_velocity(cols["rho"], cols["u"], grid, params)
    return float(np.max(np.abs(w - cols["w"])))


def blob_hash(data: bytes) -> str:
    """Git blob id: sha1 of ``blob <size>\\0`` followed by the content."""
    return hashlib.sha1(b"blob %d\0" % len(data) + data).hexdigest()


def _jsonable(x):
    if isinstance(x, float) and not math.isfinite(x):
        return str(x)
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    return x


def manifest_text(config_text: str, admissibility: dict, outputs: dict[str, bytes], status: dict) -> str:
    body = {
        "config": config_text,
        "admissibility": admissibility,
        "outputs": {name: blob_hash(data) for name, data in sorted(outputs.items())},
        "status": status,
    }
    body["content_hash"] = blob_hash("".join(body["outputs"][k] for k in sorted(body["outputs"])).encode())
    return json.dumps(_jsonable(body), indent=2, sort_keys=True) + "\n"


def write_files(directory, files: dict[str, bytes]) -> None:
    out = Path(directory)
    out.mkdir(parents=True, exist_ok=True)
    for name, data in files.items():
        (out / name).write_bytes(data)
