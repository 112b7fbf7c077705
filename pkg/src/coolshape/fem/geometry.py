"""Affine cell and boundary-facet quadrature data."""
from __future__ import annotations

import weakref
from functools import cached_property

import numpy as np

from ..mesh import Mesh
from .elements import REF_VERTICES, basis_gradients, basis_values
from .quadrature import line_rule, triangle_rule

DEFAULT_DEGREE = 4


class CellGeometry:
    """Quadrature points, weights and mapped basis data on every cell.

    ``jac[c]`` has the edge vectors ``x1 - x0`` and ``x2 - x0`` as columns.
    """

    def __init__(self, mesh: Mesh, degree: int = DEFAULT_DEGREE):
        self.mesh = mesh
        self.degree = degree
        self.ref_points, self.weights = triangle_rule(degree)
        v = mesh.vertices[mesh.cells]
        self.origin = v[:, 0]
        self.jac = np.stack([v[:, 1] - v[:, 0], v[:, 2] - v[:, 0]], axis=2)
        self.detj = self.jac[:, 0, 0] * self.jac[:, 1, 1] - self.jac[:, 0, 1] * self.jac[:, 1, 0]
        inv = np.empty_like(self.jac)
        inv[:, 0, 0] = self.jac[:, 1, 1]
        inv[:, 1, 1] = self.jac[:, 0, 0]
        inv[:, 0, 1] = -self.jac[:, 0, 1]
        inv[:, 1, 0] = -self.jac[:, 1, 0]
        self.invj = inv / self.detj[:, None, None]
        self.points = self.origin[:, None, :] + np.einsum("cij,qj->cqi", self.jac, self.ref_points)
        self.wdet = np.abs(self.detj)[:, None] * self.weights[None, :]
        self._tables: dict[int, tuple] = {}

    @property
    def n_cells(self) -> int:
        return self.mesh.n_cells

    @property
    def nq(self) -> int:
        return len(self.weights)

    def basis(self, degree: int) -> tuple[np.ndarray, np.ndarray]:
        """Values (nq, nloc) and physical gradients (nc, nq, nloc, 2)."""
        if degree not in self._tables:
            phi = basis_values(degree, self.ref_points)
            dref = basis_gradients(degree, self.ref_points)
            grads = np.einsum("qla,cab->cqlb", dref, self.invj)
            self._tables[degree] = (phi, grads)
        return self._tables[degree]


class FacetGeometry:
    """Quadrature on all boundary facets, in ``mesh.facets`` order."""

    def __init__(self, mesh: Mesh, degree: int = DEFAULT_DEGREE):
        self.mesh = mesh
        self.degree = degree
        s, w = line_rule(degree)
        self.s, self.line_weights = s, w
        a = mesh.vertices[mesh.facets[:, 0]]
        b = mesh.vertices[mesh.facets[:, 1]]
        self.points = a[:, None, :] + s[None, :, None] * (b - a)[:, None, :]
        self.lengths = mesh.facet_lengths
        self.normals = mesh.facet_normals
        self.wds = self.lengths[:, None] * w[None, :]
        self.tags = mesh.facet_tags
        self.cell, self.local, _ = mesh.facet_cells
        ra = REF_VERTICES[(self.local + 1) % 3]
        rb = REF_VERTICES[(self.local + 2) % 3]
        self.ref = ra[:, None, :] + s[None, :, None] * (rb - ra)[:, None, :]
        self._tables: dict[int, tuple] = {}

    @property
    def n_facets(self) -> int:
        return len(self.lengths)

    @property
    def nq(self) -> int:
        return len(self.s)

    def mask(self, tags=None) -> np.ndarray:
        if tags is None:
            return np.ones(self.n_facets, bool)
        tags = [int(t) for t in np.atleast_1d(tags)]
        unknown = set(tags) - set(int(t) for t in np.unique(self.tags))
        if unknown:
            raise ValueError(f"unknown boundary tag(s) {sorted(unknown)}")
        return np.isin(self.tags, tags)

    @cached_property
    def _invj(self) -> np.ndarray:
        return geometry(self.mesh).invj[self.cell]

    def basis(self, degree: int) -> tuple[np.ndarray, np.ndarray]:
        """Owning-cell basis values (nb, nq, nloc) and gradients (nb, nq, nloc, 2)."""
        if degree not in self._tables:
            phi = basis_values(degree, self.ref)
            dref = basis_gradients(degree, self.ref)
            grads = np.einsum("fqla,fab->fqlb", dref, self._invj)
            self._tables[degree] = (phi, grads)
        return self._tables[degree]


_CELLS: "weakref.WeakKeyDictionary[Mesh, dict]" = weakref.WeakKeyDictionary()
_FACETS: "weakref.WeakKeyDictionary[Mesh, dict]" = weakref.WeakKeyDictionary()


def geometry(mesh: Mesh, degree: int = DEFAULT_DEGREE) -> CellGeometry:
    per = _CELLS.setdefault(mesh, {})
    if degree not in per:
        per[degree] = CellGeometry(mesh, degree)
    return per[degree]


def facet_geometry(mesh: Mesh, degree: int = DEFAULT_DEGREE) -> FacetGeometry:
    per = _FACETS.setdefault(mesh, {})
    if degree not in per:
        per[degree] = FacetGeometry(mesh, degree)
    return per[degree]
