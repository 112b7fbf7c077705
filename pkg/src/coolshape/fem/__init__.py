"""Finite-element engine: spaces, quadrature, assembly and direct solves."""
from .assembly import Pattern, assemble_vector, block_matrix, integrate_cells, integrate_facets
from .backend import BACKEND, set_threads, use_backend
from .field import DiscreteField, interpolate, locate
from .geometry import CellGeometry, FacetGeometry, facet_geometry, geometry
from .space import Space, build_space
from .system import SolverError, SparseSystem, apply_dirichlet, constrain, dirichlet_dofs, solve_sparse

__all__ = [
    "BACKEND", "CellGeometry", "DiscreteField", "FacetGeometry", "Pattern", "SolverError", "Space",
    "SparseSystem", "apply_dirichlet", "assemble_vector", "block_matrix", "build_space", "constrain",
    "dirichlet_dofs", "facet_geometry", "geometry", "integrate_cells", "integrate_facets",
    "interpolate", "locate", "set_threads", "solve_sparse", "use_backend",
]
