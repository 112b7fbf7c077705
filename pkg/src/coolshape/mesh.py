"""Tagged triangular meshes of the cooler domain.

A :class:`Mesh` stores counterclockwise triangles, the boundary edges
("facets") with a :class:`BoundaryTag` each, and a per-cell flag marking the
microchannel subdomain.  Boundary facets are stored in the orientation of
their owning cell, so the outward unit normal of facet ``(a, b)`` is the
tangent ``b - a`` rotated clockwise.
"""
from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Mapping, Optional, Sequence

import numpy as np


class BoundaryTag(enum.IntEnum):
    INLET = 1
    OUTLET = 2
    WALL = 3


class MeshError(ValueError):
    pass


class GeometryError(MeshError):
    pass


class TaggingError(MeshError):
    pass


class UnsupportedFormatError(MeshError):
    pass


class InversionError(MeshError):
    def __init__(self, message: str, worst_cell: int):
        super().__init__(message)
        self.worst_cell = worst_cell


def _frozen(a, dtype) -> np.ndarray:
    out = np.array(a, dtype=dtype, copy=True)
    out.setflags(write=False)
    return out


def signed_areas(vertices: np.ndarray, cells: np.ndarray) -> np.ndarray:
    p0, p1, p2 = (vertices[cells[:, k]] for k in range(3))
    e1, e2 = p1 - p0, p2 - p0
    return 0.5 * (e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0])


@dataclass(frozen=True, eq=False)
class Mesh:
    """Immutable tagged triangulation.

    Parameters
    ----------
    vertices : (nv, 2) array
        Vertex coordinates in meters.
    cells : (nc, 3) int array
        Counterclockwise vertex triples.
    facets : (nb, 2) int array
        Boundary edges.  Any orientation is accepted and normalized to the
        owning cell's orientation.
    facet_tags : (nb,) int array
        :class:`BoundaryTag` code of each facet.
    subdomain : (nc,) bool array, optional
        True iff the cell belongs to the microchannel subdomain.
    """

    vertices: np.ndarray
    cells: np.ndarray
    facets: np.ndarray
    facet_tags: np.ndarray
    subdomain: Optional[np.ndarray] = None

    def __post_init__(self):
        verts = np.asarray(self.vertices, dtype=float)
        if verts.ndim != 2 or verts.shape[1] != 2:
            raise MeshError("vertices must have shape (n, 2)")
        cells = np.asarray(self.cells, dtype=np.int64).reshape(-1, 3)
        sub = np.zeros(len(cells), bool) if self.subdomain is None else np.asarray(self.subdomain, bool)
        if sub.shape != (len(cells),):
            raise MeshError("subdomain flags must have one entry per cell")
        object.__setattr__(self, "vertices", _frozen(verts, float))
        object.__setattr__(self, "cells", _frozen(cells, np.int64))
        object.__setattr__(self, "subdomain", _frozen(sub, bool))
        facets, tags = self._normalize_facets(np.asarray(self.facets, np.int64).reshape(-1, 2),
                                              np.asarray(self.facet_tags, np.int64).ravel())
        object.__setattr__(self, "facets", _frozen(facets, np.int64))
        object.__setattr__(self, "facet_tags", _frozen(tags, np.int64))
        self._validate()

    # -- connectivity -----------------------------------------------------

    @cached_property
    def _edge_data(self):
        c = self.cells
        # local edge k is opposite local vertex k
        local = np.stack([c[:, [1, 2]], c[:, [2, 0]], c[:, [0, 1]]], axis=1).reshape(-1, 2)
        key = np.sort(local, axis=1)
        edges, inverse, counts = np.unique(key, axis=0, return_inverse=True, return_counts=True)
        return edges, inverse.reshape(-1, 3), counts

    @property
    def edges(self) -> np.ndarray:
        """Unique edges as sorted vertex pairs, shape (ne, 2)."""
        return self._edge_data[0]

    @property
    def cell_edges(self) -> np.ndarray:
        """Edge index of local edge k (opposite local vertex k), shape (nc, 3)."""
        return self._edge_data[1]

    @cached_property
    def facet_cells(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(owning cell, local edge index, global edge index) for each facet."""
        nc = len(self.cells)
        edge_of = self.cell_edges.ravel()
        owner = np.full(len(self.edges), -1, np.int64)
        owner[edge_of] = np.arange(3 * nc)
        key = np.sort(self.facets, axis=1)
        idx = _row_lookup(self.edges, key)
        slot = owner[idx]
        return slot // 3, slot % 3, idx

    def _normalize_facets(self, facets, tags):
        if len(facets) != len(tags):
            raise TaggingError("facet and tag arrays differ in length")
        edges, cell_edges, counts = self._edge_data
        boundary = np.flatnonzero(counts == 1)
        key = np.sort(facets, axis=1)
        idx = _row_lookup(edges, key)
        if np.any(idx < 0):
            raise TaggingError("tagged facet is not an edge of the mesh")
        if np.any(counts[idx] != 1):
            raise TaggingError("interior edge carries a boundary tag")
        if len(np.unique(idx)) != len(idx):
            raise TaggingError("boundary edge tagged more than once")
        if len(idx) != len(boundary):
            raise TaggingError(f"{len(boundary) - len(idx)} boundary edge(s) carry no tag")
        slot = np.empty(len(edges), np.int64)
        slot[cell_edges.ravel()] = np.arange(cell_edges.size)
        cell, k = np.divmod(slot[idx], 3)
        oriented = np.stack([self.cells[cell, (k + 1) % 3], self.cells[cell, (k + 2) % 3]], axis=1)
        return oriented, tags

    def _validate(self):
        nv = len(self.vertices)
        if len(self.cells) == 0:
            raise MeshError("mesh has no cells")
        if self.cells.min() < 0 or self.cells.max() >= nv:
            raise MeshError("cell references a missing vertex")
        bad = ~np.isin(self.facet_tags, [t.value for t in BoundaryTag])
        if np.any(bad):
            raise TaggingError(f"unknown facet tag {int(self.facet_tags[bad][0])}")
        for tag in BoundaryTag:
            if not np.any(self.facet_tags == tag):
                raise TaggingError(f"no facet carries tag {tag.name}")
        if np.any(self._edge_data[2] > 2):
            raise MeshError("non-conforming mesh: edge shared by more than two cells")
        areas = signed_areas(self.vertices, self.cells)
        if np.any(areas <= 0):
            worst = int(np.argmin(areas))
            raise InversionError(f"cell {worst} has non-positive signed area", worst)

    # -- geometry ---------------------------------------------------------

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_cells(self) -> int:
        return len(self.cells)

    @cached_property
    def areas(self) -> np.ndarray:
        return signed_areas(self.vertices, self.cells)

    @property
    def area(self) -> float:
        return float(self.areas.sum())

    @cached_property
    def facet_lengths(self) -> np.ndarray:
        d = self.vertices[self.facets[:, 1]] - self.vertices[self.facets[:, 0]]
        return np.hypot(d[:, 0], d[:, 1])

    @cached_property
    def facet_normals(self) -> np.ndarray:
        d = self.vertices[self.facets[:, 1]] - self.vertices[self.facets[:, 0]]
        return np.stack([d[:, 1], -d[:, 0]], axis=1) / self.facet_lengths[:, None]

    def tag_length(self, tag: int) -> float:
        return float(self.facet_lengths[self.facet_tags == int(tag)].sum())

    @property
    def perimeter(self) -> float:
        return float(self.facet_lengths.sum())

    def tagged_vertices(self, tags) -> np.ndarray:
        tags = [int(t) for t in np.atleast_1d(tags)]
        return np.unique(self.facets[np.isin(self.facet_tags, tags)])

    @cached_property
    def h(self) -> float:
        """Largest edge length."""
        e = self.vertices[self.edges[:, 1]] - self.vertices[self.edges[:, 0]]
        return float(np.hypot(e[:, 0], e[:, 1]).max())

    def with_vertices(self, vertices: np.ndarray) -> "Mesh":
        return Mesh(vertices, self.cells, self.facets, self.facet_tags, self.subdomain)


def _row_lookup(table: np.ndarray, rows: np.ndarray) -> np.ndarray:
    """Index of each row of ``rows`` in the lexicographically sorted ``table`` (-1 if absent)."""
    if len(rows) == 0:
        return np.zeros(0, np.int64)
    base = int(max(table.max(initial=0), rows.max(initial=0))) + 1
    tk = table[:, 0] * base + table[:, 1]
    rk = rows[:, 0] * base + rows[:, 1]
    pos = np.searchsorted(tk, rk)
    pos = np.clip(pos, 0, len(tk) - 1)
    return np.where(tk[pos] == rk, pos, -1)


# -- generation -----------------------------------------------------------

_SIDES = ("left", "right", "bottom", "top")
CHANNEL_TAGS = {"left": BoundaryTag.INLET, "right": BoundaryTag.OUTLET,
                "bottom": BoundaryTag.WALL, "top": BoundaryTag.WALL}


def _subdivide(breaks: Sequence[float], h: float) -> np.ndarray:
    pts = [breaks[0]]
    for a, b in zip(breaks[:-1], breaks[1:]):
        n = max(1, math.ceil((b - a) / h - 1e-9))
        pts.extend(a + (b - a) * np.arange(1, n + 1) / n)
    out = np.array(pts, dtype=float)
    out[-1] = breaks[-1]
    return out


def _grid_mesh(xs, ys, keep_quad, sub_quad, tags: Mapping[str, int]) -> Mesh:
    nx, ny = len(xs) - 1, len(ys) - 1
    gx, gy = np.meshgrid(xs, ys, indexing="xy")
    verts = np.stack([gx.ravel(), gy.ravel()], axis=1)
    vid = np.arange(len(verts)).reshape(ny + 1, nx + 1)
    j, i = np.nonzero(keep_quad)
    v00, v10 = vid[j, i], vid[j, i + 1]
    v01, v11 = vid[j + 1, i], vid[j + 1, i + 1]
    cells = np.concatenate([np.stack([v00, v10, v11], 1), np.stack([v00, v11, v01], 1)])
    sub = np.concatenate([sub_quad[j, i], sub_quad[j, i]])
    used = np.unique(cells)
    remap = np.full(len(verts), -1, np.int64)
    remap[used] = np.arange(len(used))
    verts, cells = verts[used], remap[cells]

    local = np.concatenate([cells[:, [1, 2]], cells[:, [2, 0]], cells[:, [0, 1]]])
    key = np.sort(local, axis=1)
    _, inv, counts = np.unique(key, axis=0, return_inverse=True, return_counts=True)
    facets = local[counts[inv.ravel()] == 1]
    mid = 0.5 * (verts[facets[:, 0]] + verts[facets[:, 1]])
    x0, x1, y0, y1 = xs[0], xs[-1], ys[0], ys[-1]
    ftags = np.full(len(facets), int(BoundaryTag.WALL))
    ftags[np.isclose(mid[:, 1], y0)] = int(tags["bottom"])
    ftags[np.isclose(mid[:, 1], y1)] = int(tags["top"])
    ftags[np.isclose(mid[:, 0], x0)] = int(tags["left"])
    ftags[np.isclose(mid[:, 0], x1)] = int(tags["right"])
    return Mesh(verts, cells, facets, ftags, sub)


def rectangle(nx: int, ny: int, length: float = 1.0, height: float = 1.0,
              tags: Optional[Mapping[str, int]] = None,
              subdomain_box: Optional[Sequence[float]] = None) -> Mesh:
    """Structured ``nx`` x ``ny`` rectangle, two triangles per square.

    ``tags`` maps the sides ``left/right/bottom/top`` to boundary tags
    (default: inlet left, outlet right, walls elsewhere).  Cells whose
    centroid lies in ``subdomain_box = (x0, x1, y0, y1)`` are flagged.
    """
    tags = {**CHANNEL_TAGS, **(tags or {})}
    unknown = set(tags) - set(_SIDES)
    if unknown:
        raise GeometryError(f"unknown side name(s): {sorted(unknown)}")
    xs = np.linspace(0.0, length, nx + 1)
    ys = np.linspace(0.0, height, ny + 1)
    keep = np.ones((ny, nx), bool)
    sub = np.zeros((ny, nx), bool)
    if subdomain_box is not None:
        bx0, bx1, by0, by1 = subdomain_box
        cx = 0.5 * (xs[:-1] + xs[1:])
        cy = 0.5 * (ys[:-1] + ys[1:])
        sub = ((cy[:, None] > by0) & (cy[:, None] < by1) & (cx[None, :] > bx0) & (cx[None, :] < bx1))
    return _grid_mesh(xs, ys, keep, sub, tags)


def unit_square(n: int, tags: Optional[Mapping[str, int]] = None, **kw) -> Mesh:
    return rectangle(n, n, 1.0, 1.0, tags=tags, **kw)


def fin_layout(length: float, height: float, n_fins: int, fin_width: float,
               fin_height: float) -> list[tuple[float, float, float, float]]:
    """Fin rectangles ``(x0, x1, y0, y1)``: evenly spaced, vertically centered."""
    if n_fins == 0:
        return []
    if fin_width is None or fin_height is None or fin_width <= 0 or fin_height <= 0:
        raise GeometryError("fin dimensions must be positive")
    pitch = length / (n_fins + 1)
    if fin_width >= pitch:
        raise GeometryError("fins overlap or touch each other or the inlet/outlet")
    if fin_height >= height:
        raise GeometryError("fins touch the top or bottom wall")
    y0 = 0.5 * (height - fin_height)
    return [(pitch * (k + 1) - 0.5 * fin_width, pitch * (k + 1) + 0.5 * fin_width, y0, y0 + fin_height)
            for k in range(n_fins)]


def generate_channel_array(length: float, height: float, n_fins: int,
                           fin_width: Optional[float], fin_height: Optional[float],
                           h_target: float) -> Mesh:
    """Rectangle with ``n_fins`` rectangular fins cut out.

    The gaps between neighbouring fins are the microchannels; the cells in
    the band between the fins' bottom and top edges, from the first fin's
    left edge to the last fin's right edge, form the subdomain.  The left
    side is the inlet, the right side the outlet, everything else is wall.
    """
    if n_fins < 0:
        raise GeometryError("n_fins must be non-negative")
    if h_target <= 0 or length <= 0 or height <= 0:
        raise GeometryError("lengths and h_target must be positive")
    fins = fin_layout(length, height, n_fins, fin_width, fin_height)
    xb = sorted({0.0, length, *(f[0] for f in fins), *(f[1] for f in fins)})
    yb = sorted({0.0, height, *(f[2] for f in fins), *(f[3] for f in fins)})
    xs, ys = _subdivide(xb, h_target), _subdivide(yb, h_target)
    cx = 0.5 * (xs[:-1] + xs[1:])[None, :]
    cy = 0.5 * (ys[:-1] + ys[1:])[:, None]
    keep = np.ones((len(ys) - 1, len(xs) - 1), bool)
    for x0, x1, y0, y1 in fins:
        keep &= ~((cx > x0) & (cx < x1) & (cy > y0) & (cy < y1))
    if fins:
        band = (cy > fins[0][2]) & (cy < fins[0][3]) & (cx > fins[0][0]) & (cx < fins[-1][1])
        sub = band & keep
    else:
        sub = np.zeros_like(keep)
    return _grid_mesh(xs, ys, keep, sub, CHANNEL_TAGS)


def refine(mesh: Mesh, return_parent: bool = False):
    """Uniform red refinement: every triangle is split into four."""
    nv = mesh.n_vertices
    edges, ce = mesh.edges, mesh.cell_edges
    mids = 0.5 * (mesh.vertices[edges[:, 0]] + mesh.vertices[edges[:, 1]])
    verts = np.vstack([mesh.vertices, mids])
    c = mesh.cells
    m0, m1, m2 = (nv + ce[:, k] for k in range(3))  # midpoint opposite vertex k
    cells = np.concatenate([
        np.stack([c[:, 0], m2, m1], 1),
        np.stack([m2, c[:, 1], m0], 1),
        np.stack([m1, m0, c[:, 2]], 1),
        np.stack([m0, m1, m2], 1),
    ])
    parent = np.tile(np.arange(mesh.n_cells), 4)
    _, _, fedge = mesh.facet_cells
    fm = nv + fedge
    facets = np.concatenate([np.stack([mesh.facets[:, 0], fm], 1), np.stack([fm, mesh.facets[:, 1]], 1)])
    tags = np.concatenate([mesh.facet_tags, mesh.facet_tags])
    fine = Mesh(verts, cells, facets, tags, mesh.subdomain[parent])
    return (fine, parent) if return_parent else fine


# -- deformation and quality ---------------------------------------------

def deform(mesh: Mesh, displacement: np.ndarray, t: float = 1.0, check_fixed: bool = True) -> Mesh:
    """Move every vertex by ``t * displacement``; tags and flags are kept.

    With ``check_fixed`` the displacement must vanish on inlet and outlet
    vertices, which keeps the result in the admissible set.
    """
    d = np.asarray(displacement, dtype=float)
    if d.shape != mesh.vertices.shape:
        raise MeshError(f"displacement must have shape {mesh.vertices.shape}")
    if check_fixed:
        fixed = mesh.tagged_vertices([BoundaryTag.INLET, BoundaryTag.OUTLET])
        if np.any(d[fixed] != 0.0):
            raise MeshError("displacement does not vanish on inlet/outlet vertices")
    verts = mesh.vertices + t * d
    areas = signed_areas(verts, mesh.cells)
    if np.any(areas <= 0):
        worst = int(np.argmin(areas))
        raise InversionError(f"deformation inverts cell {worst}", worst)
    return mesh.with_vertices(verts)


@dataclass(frozen=True)
class QualityReport:
    min_angle: float
    min_area_ratio: float
    worst_cell: int


def cell_min_angles(vertices: np.ndarray, cells: np.ndarray) -> np.ndarray:
    p = vertices[cells]
    angles = []
    for k in range(3):
        a = p[:, (k + 1) % 3] - p[:, k]
        b = p[:, (k + 2) % 3] - p[:, k]
        cross = a[:, 0] * b[:, 1] - a[:, 1] * b[:, 0]
        dot = np.einsum("ij,ij->i", a, b)
        angles.append(np.degrees(np.arctan2(np.abs(cross), dot)))
    return np.min(angles, axis=0)


def quality(mesh: Mesh) -> QualityReport:
    angles = cell_min_angles(mesh.vertices, mesh.cells)
    worst = int(np.argmin(angles))
    areas = mesh.areas
    return QualityReport(float(angles[worst]), float(areas.min() / areas.mean()), worst)


# -- Gmsh MSH 2.2 ---------------------------------------------------------

def _sections(text: str) -> dict[str, list[str]]:
    out: dict[str, list[str]] = {}
    lines = text.splitlines()
    i = 0
    while i < len(lines):
        line = lines[i].strip()
        if line.startswith("$") and not line.startswith("$End"):
            name = line[1:]
            j = i + 1
            while j < len(lines) and lines[j].strip() != f"$End{name}":
                j += 1
            out[name] = lines[i + 1:j]
            i = j
        i += 1
    return out


def load_msh(path, subdomain_group: int = 4) -> Mesh:
    """Read a Gmsh MSH 2.2 ASCII file.

    Boundary lines (element type 1) must carry physical group 1, 2 or 3
    (inlet, outlet, wall).  Triangles in physical group ``subdomain_group``
    form the microchannel subdomain.  Inverted triangles are repaired by a
    vertex swap with a warning.
    """
    text = Path(path).read_text()
    sec = _sections(text)
    if "MeshFormat" not in sec:
        raise UnsupportedFormatError("missing $MeshFormat section")
    fmt = sec["MeshFormat"][0].split()
    if fmt[0] != "2.2" or (len(fmt) > 1 and fmt[1] != "0"):
        raise UnsupportedFormatError(f"unsupported MSH version {' '.join(fmt[:2])}; expected 2.2 ASCII")
    nodes = sec["Nodes"]
    n_nodes = int(nodes[0])
    ids = np.empty(n_nodes, np.int64)
    xyz = np.empty((n_nodes, 3))
    for k, line in enumerate(nodes[1:n_nodes + 1]):
        parts = line.split()
        ids[k] = int(parts[0])
        xyz[k] = [float(v) for v in parts[1:4]]
    if np.any(xyz[:, 2] != 0.0):
        raise UnsupportedFormatError("only planar meshes with z = 0 are supported")
    id_to_row = {int(n): k for k, n in enumerate(ids)}

    tris, tri_groups, lines_, line_groups = [], [], [], []
    elems = sec["Elements"]
    for line in elems[1:int(elems[0]) + 1]:
        parts = [int(v) for v in line.split()]
        etype, ntags = parts[1], parts[2]
        group = parts[3] if ntags > 0 else 0
        conn = [id_to_row[v] for v in parts[3 + ntags:]]
        if etype == 2:
            tris.append(conn)
            tri_groups.append(group)
        elif etype == 1:
            lines_.append(conn)
            line_groups.append(group)
    if not tris:
        raise MeshError("no triangles in file")
    cells = np.array(tris, np.int64)
    areas = signed_areas(xyz[:, :2], cells)
    flipped = areas < 0
    if np.any(flipped):
        warnings.warn(f"repaired orientation of {int(flipped.sum())} inverted triangle(s)", stacklevel=2)
        cells[flipped] = cells[flipped][:, [0, 2, 1]]
    used = np.unique(cells)
    remap = np.full(len(xyz), -1, np.int64)
    remap[used] = np.arange(len(used))
    facets = np.array(lines_, np.int64).reshape(-1, 2)
    groups = np.array(line_groups, np.int64)
    if np.any(remap[facets] < 0):
        raise TaggingError("boundary line references a node outside the triangulation")
    untagged = ~np.isin(groups, [1, 2, 3])
    if np.any(untagged):
        raise TaggingError(f"{int(untagged.sum())} boundary line(s) lack a physical group in {{1, 2, 3}}")
    sub = np.array(tri_groups) == subdomain_group
    return Mesh(xyz[used, :2], remap[cells], remap[facets], groups, sub)


def write_msh(mesh: Mesh, path) -> None:
    """Write a Gmsh MSH 2.2 ASCII file (debug helper; round-trips exactly)."""
    out = ["$MeshFormat", "2.2 0 8", "$EndMeshFormat", "$Nodes", str(mesh.n_vertices)]
    out += [f"{k + 1} {x!r} {y!r} 0" for k, (x, y) in enumerate(mesh.vertices.tolist())]
    out += ["$EndNodes", "$Elements", str(len(mesh.facets) + mesh.n_cells)]
    eid = 1
    for (a, b), tag in zip(mesh.facets.tolist(), mesh.facet_tags.tolist()):
        out.append(f"{eid} 1 2 {tag} {tag} {a + 1} {b + 1}")
        eid += 1
    for (a, b, c), s in zip(mesh.cells.tolist(), mesh.subdomain.tolist()):
        group = 4 if s else 5
        out.append(f"{eid} 2 2 {group} {group} {a + 1} {b + 1} {c + 1}")
        eid += 1
    out.append("$EndElements")
    Path(path).write_text("\n".join(out) + "\n")
