"""Linear systems: Dirichlet elimination and direct sparse solves."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sps
import scipy.sparse.linalg as spla

from ..expr import ScalarExpr, VectorExpr
from .space import Space


class SolverError(RuntimeError):
    pass


@dataclass
class SparseSystem:
    matrix: sps.csr_matrix
    rhs: np.ndarray

    def __post_init__(self):
        if self.matrix.shape[0] != self.matrix.shape[1]:
            raise ValueError("system matrix must be square")
        if self.rhs.shape != (self.matrix.shape[0],):
            raise ValueError("right-hand side does not match the matrix")


def constrain(system: SparseSystem, dofs: np.ndarray, values=0.0) -> SparseSystem:
    """Impose ``x[dofs] = values`` by symmetric elimination.

    Constrained rows and columns are zeroed, the diagonal set to one and the
    right-hand side corrected for the eliminated columns.
    """
    dofs = np.asarray(dofs, dtype=np.int64)
    A = system.matrix.tocsr(copy=True)
    A.sort_indices()
    n = A.shape[0]
    xd = np.zeros(n)
    xd[dofs] = np.broadcast_to(np.asarray(values, dtype=float), dofs.shape)
    dofs = np.unique(dofs)
    b = system.rhs - A @ xd
    is_fixed = np.zeros(n, bool)
    is_fixed[dofs] = True
    rows = np.repeat(np.arange(n), np.diff(A.indptr))
    A.data[is_fixed[rows] | is_fixed[A.indices]] = 0.0
    diag = is_fixed[rows] & (A.indices == rows)
    if diag.sum() != len(dofs):
        m = A.tocoo()
        idx = np.arange(n)
        A = sps.coo_matrix((np.concatenate([m.data, np.zeros(n)]),
                            (np.concatenate([m.row, idx]), np.concatenate([m.col, idx]))), shape=A.shape).tocsr()
        A.sum_duplicates()
        rows = np.repeat(np.arange(n), np.diff(A.indptr))
        diag = is_fixed[rows] & (A.indices == rows)
    A.data[diag] = 1.0
    b[dofs] = xd[dofs]
    return SparseSystem(A, b)


def _values_at(space: Space, dofs_scalar: np.ndarray, value) -> np.ndarray:
    pts = space.dof_coords[dofs_scalar]
    if space.ncomp == 1:
        if isinstance(value, (int, float)):
            return np.full(len(dofs_scalar), float(value))
        expr = value if isinstance(value, ScalarExpr) else ScalarExpr(value)
        return expr(pts)
    if isinstance(value, (int, float)):
        return np.full(2 * len(dofs_scalar), float(value))
    expr = value if isinstance(value, VectorExpr) else VectorExpr(value)
    vals = expr(pts)
    return np.concatenate([vals[:, 0], vals[:, 1]])


def dirichlet_dofs(space: Space, tags, value=0.0, offset: int = 0):
    """Global dofs (shifted by ``offset``) and values for a Dirichlet condition."""
    s = space.scalar_boundary_dofs(tags)
    dofs = np.concatenate([c * space.n_scalar + s for c in range(space.ncomp)]) + offset
    return dofs, _values_at(space, s, value)


def apply_dirichlet(system: SparseSystem, space: Space, tag, value=0.0, offset: int = 0) -> SparseSystem:
    """Strongly impose ``value`` on the dofs of ``space`` on facets tagged ``tag``.

    ``offset`` locates the space's block inside a larger (mixed) system.
    """
    dofs, vals = dirichlet_dofs(space, tag, value, offset)
    return constrain(system, dofs, vals)


def solve_sparse(system: SparseSystem, rtol: float = 1e-10) -> np.ndarray:
    """Direct LU solve with a residual check and one refinement step."""
    A = sps.csc_matrix(system.matrix)
    b = np.asarray(system.rhs, dtype=float)
    bnorm = np.abs(b).max(initial=0.0)
    if A.nnz == 0 or not np.any(A.data):
        raise SolverError("matrix is zero")
    try:
        lu = spla.splu(A)
    except RuntimeError as exc:
        raise SolverError(f"factorization failed: {exc}") from exc
    if bnorm == 0.0:
        return np.zeros_like(b)
    x = lu.solve(b)
    r = b - A @ x
    if np.abs(r).max() > rtol * bnorm:
        x = x + lu.solve(r)
        r = b - A @ x
    res = np.abs(r).max() / bnorm
    if not np.isfinite(res) or res > rtol:
        raise SolverError(f"relative residual {res:.2e} exceeds {rtol:.0e}")
    return x
