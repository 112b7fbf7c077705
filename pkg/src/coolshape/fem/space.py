"""Lagrange function spaces on a :class:`~coolshape.mesh.Mesh`."""
from __future__ import annotations

from functools import cached_property

import numpy as np

from ..mesh import Mesh
from .elements import n_local

FAMILIES = {"P1": (1, 1), "P2": (2, 1), "P1v": (1, 2), "P2v": (2, 2)}
ALIASES = {
    "P1-scalar": "P1",
    "P2-scalar": "P2",
    "P1-vector-2D": "P1v",
    "P2-vector-2D": "P2v",
}


class Space:
    """Continuous Lagrange space.

    Scalar dofs are numbered vertices first, then (P2) edge midpoints in
    ``mesh.edges`` order.  Vector spaces are component-blocked: dof
    ``c * n_scalar + i`` is component ``c`` of scalar dof ``i``.
    """

    def __init__(self, mesh: Mesh, family: str):
        family = ALIASES.get(family, family)
        if family not in FAMILIES:
            raise ValueError(f"unknown family {family!r}; expected one of {sorted(FAMILIES) + sorted(ALIASES)}")
        self.mesh = mesh
        self.family = family
        self.degree, self.ncomp = FAMILIES[family]
        self.nloc = n_local(self.degree)

    def __repr__(self) -> str:
        return f"Space({self.family}, dim={self.dim})"

    @property
    def n_scalar(self) -> int:
        nv = self.mesh.n_vertices
        return nv if self.degree == 1 else nv + len(self.mesh.edges)

    @property
    def dim(self) -> int:
        return self.ncomp * self.n_scalar

    @cached_property
    def cell_dofs(self) -> np.ndarray:
        """Scalar dofs per cell, shape (nc, nloc)."""
        if self.degree == 1:
            return self.mesh.cells
        return np.hstack([self.mesh.cells, self.mesh.n_vertices + self.mesh.cell_edges])

    @cached_property
    def dof_coords(self) -> np.ndarray:
        v = self.mesh.vertices
        if self.degree == 1:
            return v
        e = self.mesh.edges
        return np.vstack([v, 0.5 * (v[e[:, 0]] + v[e[:, 1]])])

    def scalar_boundary_dofs(self, tags) -> np.ndarray:
        tags = [int(t) for t in np.atleast_1d(tags)]
        sel = np.isin(self.mesh.facet_tags, tags)
        dofs = [self.mesh.facets[sel].ravel()]
        if self.degree == 2:
            dofs.append(self.mesh.n_vertices + self.mesh.facet_cells[2][sel])
        return np.unique(np.concatenate(dofs))

    def boundary_dofs(self, tags, component=None) -> np.ndarray:
        """Global dofs on facets carrying any of ``tags`` (all components by default)."""
        s = self.scalar_boundary_dofs(tags)
        comps = range(self.ncomp) if component is None else [component]
        return np.concatenate([c * self.n_scalar + s for c in comps])

    def component(self, coeffs: np.ndarray, c: int) -> np.ndarray:
        return coeffs[c * self.n_scalar:(c + 1) * self.n_scalar]

    def scalar_space(self) -> "Space":
        return self if self.ncomp == 1 else Space(self.mesh, "P1" if self.degree == 1 else "P2")


def build_space(mesh: Mesh, family: str) -> Space:
    return Space(mesh, family)
