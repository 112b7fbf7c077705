"""Discrete fields, nodal interpolation and point evaluation."""
from __future__ import annotations

import numpy as np
from scipy.spatial import cKDTree

from ..expr import ScalarExpr, VectorExpr
from ..mesh import Mesh
from .elements import basis_gradients, basis_values
from .geometry import CellGeometry, FacetGeometry, geometry
from .space import Space


class DiscreteField:
    """Coefficient vector on a :class:`Space`."""

    def __init__(self, space: Space, coeffs=None):
        self.space = space
        if coeffs is None:
            coeffs = np.zeros(space.dim)
        coeffs = np.asarray(coeffs, dtype=float)
        if coeffs.shape != (space.dim,):
            raise ValueError(f"expected {space.dim} coefficients, got {coeffs.shape}")
        self.coeffs = coeffs

    def __repr__(self) -> str:
        return f"DiscreteField({self.space.family}, norm={np.linalg.norm(self.coeffs):.3e})"

    def _like(self, coeffs) -> "DiscreteField":
        return DiscreteField(self.space, coeffs)

    def _check(self, other: "DiscreteField"):
        if other.space.dim != self.space.dim or other.space.family != self.space.family:
            raise ValueError("fields live in different spaces")

    def __add__(self, other):
        self._check(other)
        return self._like(self.coeffs + other.coeffs)

    def __sub__(self, other):
        self._check(other)
        return self._like(self.coeffs - other.coeffs)

    def __mul__(self, a: float):
        return self._like(a * self.coeffs)

    __rmul__ = __mul__

    def __neg__(self):
        return self._like(-self.coeffs)

    def on(self, mesh: Mesh) -> "DiscreteField":
        """Same coefficients on a mesh with identical topology (nodal values ride along)."""
        return DiscreteField(Space(mesh, self.space.family), self.coeffs)

    def _local(self) -> np.ndarray:
        """Cell-local coefficients, shape (ncomp, nc, nloc)."""
        sp = self.space
        return np.stack([sp.component(self.coeffs, c)[sp.cell_dofs] for c in range(sp.ncomp)])

    def cell_values(self, geom: CellGeometry | None = None) -> np.ndarray:
        """Values at cell quadrature points: (nc, nq) or (nc, nq, 2)."""
        geom = geom or geometry(self.space.mesh)
        phi, _ = geom.basis(self.space.degree)
        vals = np.einsum("kcl,ql->cqk", self._local(), phi)
        return vals[..., 0] if self.space.ncomp == 1 else vals

    def cell_gradients(self, geom: CellGeometry | None = None) -> np.ndarray:
        """Gradients at cell quadrature points: (nc, nq, 2) or Jacobians (nc, nq, 2, 2)."""
        geom = geom or geometry(self.space.mesh)
        _, grads = geom.basis(self.space.degree)
        g = np.einsum("kcl,cqla->cqka", self._local(), grads)
        return g[:, :, 0, :] if self.space.ncomp == 1 else g

    def facet_values(self, fgeom: FacetGeometry) -> np.ndarray:
        phi, _ = fgeom.basis(self.space.degree)
        loc = self._local()[:, fgeom.cell]
        vals = np.einsum("kfl,fql->fqk", loc, phi)
        return vals[..., 0] if self.space.ncomp == 1 else vals

    def facet_gradients(self, fgeom: FacetGeometry) -> np.ndarray:
        _, grads = fgeom.basis(self.space.degree)
        loc = self._local()[:, fgeom.cell]
        g = np.einsum("kfl,fqla->fqka", loc, grads)
        return g[:, :, 0, :] if self.space.ncomp == 1 else g

    def eval_in_cells(self, cells: np.ndarray, points: np.ndarray, gradient: bool = False) -> np.ndarray:
        """Evaluate at ``points`` known to lie in ``cells`` (one cell per point)."""
        mesh = self.space.mesh
        geom = geometry(mesh)
        ref = np.einsum("nab,nb->na", geom.invj[cells], points - geom.origin[cells])
        loc = self._local()[:, cells]
        if gradient:
            dref = basis_gradients(self.space.degree, ref)
            g = np.einsum("nla,nab->nlb", dref, geom.invj[cells])
            out = np.einsum("knl,nla->nka", loc, g)
            return out[:, 0] if self.space.ncomp == 1 else out
        out = np.einsum("knl,nl->nk", loc, basis_values(self.space.degree, ref))
        return out[:, 0] if self.space.ncomp == 1 else out

    def __call__(self, points: np.ndarray, outside: float = np.nan) -> np.ndarray:
        pts = np.asarray(points, dtype=float).reshape(-1, 2)
        cells = locate(self.space.mesh, pts)
        shape = (len(pts),) if self.space.ncomp == 1 else (len(pts), 2)
        out = np.full(shape, outside)
        ok = cells >= 0
        if np.any(ok):
            out[ok] = self.eval_in_cells(cells[ok], pts[ok])
        return out

    def gradient_at(self, points: np.ndarray) -> np.ndarray:
        pts = np.asarray(points, dtype=float).reshape(-1, 2)
        cells = locate(self.space.mesh, pts)
        shape = (len(pts), 2) if self.space.ncomp == 1 else (len(pts), 2, 2)
        out = np.zeros(shape)
        ok = cells >= 0
        if np.any(ok):
            out[ok] = self.eval_in_cells(cells[ok], pts[ok], gradient=True)
        return out


def locate(mesh: Mesh, points: np.ndarray, k: int = 12, tol: float = 1e-12) -> np.ndarray:
    """Index of a cell containing each point, or -1."""
    geom = geometry(mesh)
    centroids = mesh.vertices[mesh.cells].mean(axis=1)
    tree = cKDTree(centroids)
    k = min(k, mesh.n_cells)
    _, cand = tree.query(points, k=k)
    cand = cand.reshape(len(points), k)
    found = np.full(len(points), -1, np.int64)
    for j in range(k):
        todo = found < 0
        if not np.any(todo):
            break
        c = cand[todo, j]
        ref = np.einsum("nab,nb->na", geom.invj[c], points[todo] - geom.origin[c])
        inside = (ref[:, 0] >= -tol) & (ref[:, 1] >= -tol) & (ref.sum(axis=1) <= 1 + tol)
        idx = np.flatnonzero(todo)[inside]
        found[idx] = c[inside]
    missing = np.flatnonzero(found < 0)
    for i in missing:
        ref = np.einsum("nab,b->na", geom.invj, points[i]) - np.einsum("nab,nb->na", geom.invj, geom.origin)
        inside = (ref[:, 0] >= -tol) & (ref[:, 1] >= -tol) & (ref.sum(axis=1) <= 1 + tol)
        hits = np.flatnonzero(inside)
        if len(hits):
            found[i] = hits[0]
    return found


def interpolate(expression, space: Space) -> DiscreteField:
    """Nodal interpolant of a number, expression, or callable ``f(points)``."""
    pts = space.dof_coords
    if space.ncomp == 1:
        if callable(expression) and not isinstance(expression, (ScalarExpr, VectorExpr)):
            vals = np.asarray(expression(pts), dtype=float)
        else:
            expr = expression if isinstance(expression, ScalarExpr) else ScalarExpr(expression)
            vals = expr(pts)
        return DiscreteField(space, np.broadcast_to(vals, (space.n_scalar,)).copy())
    if callable(expression) and not isinstance(expression, (ScalarExpr, VectorExpr)):
        vals = np.asarray(expression(pts), dtype=float)
    else:
        expr = expression if isinstance(expression, VectorExpr) else VectorExpr(expression)
        vals = expr(pts)
    vals = np.broadcast_to(vals, (space.n_scalar, 2))
    return DiscreteField(space, np.concatenate([vals[:, 0], vals[:, 1]]))
