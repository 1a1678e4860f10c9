"""CSV / JSON / OBJ output and bit-exact reload.

CSV numbers are written with Python's shortest round-trip representation,
so a load followed by a recompute reproduces every residual exactly.
Meshes go out as OBJ: grid triangulations for surfaces, polylines for
images that collapse to a curve, with per-vertex Gauss curvature in a
plain-text sidecar when requested.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from . import fieldcalc as fc
from .codazzi import CodazziSolution, SurfaceSpec, BuiltSurface
from .errors import ConfigError


# ---------------------------------------------------------------------------
# CSV fields
# ---------------------------------------------------------------------------

def write_table(path, columns: dict):
    """Write named 1-D arrays of equal length as CSV with repr floats."""
    names = list(columns)
    arrays = [np.asarray(columns[k]).ravel() for k in names]
    n = len(arrays[0])
    if any(len(a) != n for a in arrays):
        raise ConfigError("columns have unequal lengths")
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(names)
        for i in range(n):
            w.writerow([repr(float(a[i])) for a in arrays])


def read_table(path) -> dict:
    """Inverse of `write_table`; returns name -> 1-D float array."""
    with open(path, newline="") as fh:
        r = csv.reader(fh)
        names = next(r)
        rows = [[float(v) for v in row] for row in r if row]
    data = np.array(rows, dtype=float)
    if data.size == 0:
        data = data.reshape(0, len(names))
    return {name: data[:, k] for k, name in enumerate(names)}


def grid_columns(grid) -> dict:
    meshes = grid.meshes()
    names = ["v1", "v2", "v3"][: grid.ndim]
    return {n: m.ravel() for n, m in zip(names, meshes)}


def save_surface(path, surface: BuiltSurface):
    """Surface chart sample: coordinates, position, tangents, normal."""
    cols = grid_columns(surface.spec.domain)
    for k in range(3):
        cols[f"x{k + 1}"] = surface.x.values[..., k]
    for i in range(2):
        for k in range(3):
            cols[f"t{i + 1}{k + 1}"] = surface.tangents[..., i, k]
    for k in range(3):
        cols[f"n{k + 1}"] = surface.normal[..., k]
    write_table(path, cols)


def save_codazzi(path, sol: CodazziSolution):
    cols = grid_columns(sol.spec.domain)
    cols["b11"] = sol.b11.values
    cols["b12"] = sol.b12.values
    cols["b22"] = sol.b22.values
    cols["gauss_residual"] = sol.gauss_residual.values
    write_table(path, cols)


def load_codazzi(path, spec: SurfaceSpec) -> CodazziSolution:
    t = read_table(path)
    shape = spec.domain.shape
    return CodazziSolution(
        spec=spec,
        b11=fc.ScalarField(spec.domain, t["b11"].reshape(shape)),
        b12=fc.ScalarField(spec.domain, t["b12"].reshape(shape)),
        b22=fc.ScalarField(spec.domain, t["b22"].reshape(shape)),
        gauss_residual=fc.ScalarField(
            spec.domain, t["gauss_residual"].reshape(shape)),
    )


def save_immersion(path, x: fc.ImmersionField):
    cols = grid_columns(x.grid)
    for k in range(x.ambient_dim):
        cols[f"x{k + 1}"] = x.values[..., k]
    write_table(path, cols)


def load_immersion(path, grid) -> fc.ImmersionField:
    t = read_table(path)
    comps = sorted(k for k in t if k.startswith("x"))
    vals = np.stack([t[k].reshape(grid.shape) for k in comps], axis=-1)
    return fc.ImmersionField(grid, vals)


# ---------------------------------------------------------------------------
# JSON manifests / reports
# ---------------------------------------------------------------------------

def write_json(path, payload: dict):
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_json(path) -> dict:
    with open(path) as fh:
        return json.load(fh)


def write_manifest(path, spec: SurfaceSpec, tolerances: dict,
                   files: list, version: str, extra: dict = None):
    payload = {
        "spec": spec.to_dict(),
        "tolerances": tolerances,
        "files": sorted(files),
        "version": version,
    }
    if extra:
        payload.update(extra)
    write_json(path, payload)


# ---------------------------------------------------------------------------
# OBJ meshes
# ---------------------------------------------------------------------------

def _fmt(v):
    return f"{v:.9g}"


def export_obj_mesh(path, points: np.ndarray):
    """Watertight grid triangulation of an (n1, n2, 3) point lattice."""
    points = np.asarray(points, dtype=float)
    if points.ndim != 3 or points.shape[-1] != 3:
        raise ConfigError(f"mesh export needs (n1, n2, 3), got {points.shape}")
    n1, n2 = points.shape[:2]
    lines = [f"v {_fmt(p[0])} {_fmt(p[1])} {_fmt(p[2])}"
             for p in points.reshape(-1, 3)]
    for i in range(n1 - 1):
        for j in range(n2 - 1):
            a = i * n2 + j + 1
            b = a + 1
            c = a + n2
            d = c + 1
            lines.append(f"f {a} {b} {d}")
            lines.append(f"f {a} {d} {c}")
    Path(path).write_text("\n".join(lines) + "\n")


def export_obj_polyline(path, points: np.ndarray):
    """Ordered point sequence as an OBJ polyline."""
    points = np.asarray(points, dtype=float).reshape(-1, 3)
    lines = [f"v {_fmt(p[0])} {_fmt(p[1])} {_fmt(p[2])}" for p in points]
    chain = " ".join(str(i + 1) for i in range(len(points)))
    lines.append(f"l {chain}")
    Path(path).write_text("\n".join(lines) + "\n")


def export_curvature_attribute(path, values: np.ndarray):
    """Per-vertex scalar attribute, one value per line in vertex order."""
    vals = np.asarray(values, dtype=float).ravel()
    Path(path).write_text("\n".join(repr(float(v)) for v in vals) + "\n")
