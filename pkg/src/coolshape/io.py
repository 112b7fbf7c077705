"""Output writers: legacy ASCII VTK, history CSV and deterministic JSON."""
from __future__ import annotations

import csv
import json
import math
from pathlib import Path
from typing import Mapping, Optional

import numpy as np

from .fem.field import DiscreteField
from .mesh import Mesh

HISTORY_COLUMNS = ["iter", "J_total", "J_flux", "J_tracking", "J_perimeter", "Q", "grad_norm", "step", "min_angle"]


def vertex_values(f: DiscreteField) -> np.ndarray:
    """Values of a Lagrange field at the mesh vertices, shape (nv,) or (nv, 2)."""
    sp = f.space
    nv = sp.mesh.n_vertices
    if sp.ncomp == 1:
        return np.asarray(f.coeffs[:nv], float)
    return np.stack([sp.component(f.coeffs, c)[:nv] for c in range(sp.ncomp)], 1)


def _fmt(x) -> str:
    return repr(float(x))


def write_vtk(path, mesh: Mesh, point_data: Optional[Mapping[str, np.ndarray]] = None,
              cell_data: Optional[Mapping[str, np.ndarray]] = None, title: str = "coolshape") -> Path:
    """Write an UNSTRUCTURED_GRID of triangles; 2-vectors are padded with z = 0."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    nv, nc = mesh.n_vertices, mesh.n_cells
    out = ["# vtk DataFile Version 3.0", title.replace("\n", " ")[:255], "ASCII", "DATASET UNSTRUCTURED_GRID",
           f"POINTS {nv} double"]
    out += [f"{_fmt(x)} {_fmt(y)} 0.0" for x, y in mesh.vertices]
    out.append(f"CELLS {nc} {4 * nc}")
    out += [f"3 {a} {b} {c}" for a, b, c in mesh.cells]
    out.append(f"CELL_TYPES {nc}")
    out += ["5"] * nc

    def block(data, n, kind):
        lines = [f"{kind} {n}"]
        for name, arr in data.items():
            a = np.asarray(arr, float)
            if a.shape[0] != n:
                raise ValueError(f"{kind.lower()} {name!r} has {a.shape[0]} entries, expected {n}")
            key = name.replace(" ", "_")
            if a.ndim == 1:
                lines += [f"SCALARS {key} double 1", "LOOKUP_TABLE default"]
                lines += [_fmt(v) for v in a]
            else:
                lines.append(f"VECTORS {key} double")
                lines += [f"{_fmt(u)} {_fmt(v)} 0.0" for u, v in a[:, :2]]
        return lines

    cells = {"subdomain": mesh.subdomain.astype(float), **(cell_data or {})}
    out += block(cells, nc, "CELL_DATA")
    if point_data:
        out += block(point_data, nv, "POINT_DATA")
    path.write_text("\n".join(out) + "\n")
    return path


def read_vtk_points(path) -> np.ndarray:
    """Point coordinates of a file written by :func:`write_vtk` (for round-trip checks)."""
    lines = Path(path).read_text().splitlines()
    i = next(k for k, s in enumerate(lines) if s.startswith("POINTS"))
    n = int(lines[i].split()[1])
    return np.array([[float(v) for v in s.split()[:2]] for s in lines[i + 1:i + 1 + n]])


def write_history_csv(path, rows) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=HISTORY_COLUMNS, lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow({k: (r[k] if k == "iter" else _fmt(r[k])) for k in HISTORY_COLUMNS})
    return path


def read_history_csv(path) -> list:
    with Path(path).open() as fh:
        return [{k: (int(v) if k == "iter" else float(v)) for k, v in row.items()} for row in csv.DictReader(fh)]


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else str(x)
    return obj


def write_json(path, data) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(_clean(data), indent=2, sort_keys=True) + "\n")
    return path
