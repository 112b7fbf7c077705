"""Sparse assembly of local element contributions."""
from __future__ import annotations

from typing import Callable, Optional, Union

import numpy as np
import scipy.sparse as sps

from ..expr import ScalarExpr
from . import backend
from .geometry import DEFAULT_DEGREE, facet_geometry, geometry


class Pattern:
    """CSR sparsity pattern for a fixed pair of row/column dof maps.

    The full diagonal is always part of the pattern (explicit zeros where no
    element contributes), so Dirichlet rows can be set to identity in place.
    """

    def __init__(self, rows: np.ndarray, cols: np.ndarray, shape: tuple[int, int]):
        nr, nc_ = shape
        r = np.broadcast_to(rows[:, :, None], (rows.shape[0], rows.shape[1], cols.shape[1])).ravel()
        c = np.broadcast_to(cols[:, None, :], (cols.shape[0], rows.shape[1], cols.shape[1])).ravel()
        nd = min(nr, nc_)
        keys = np.concatenate([r * nc_ + c, np.arange(nd) * nc_ + np.arange(nd)])
        uniq, inverse = np.unique(keys, return_inverse=True)
        self.shape = shape
        self.positions = inverse[: r.size].astype(np.int64)
        self.indices = (uniq % nc_).astype(np.int32)
        self.indptr = np.searchsorted(uniq // nc_, np.arange(nr + 1)).astype(np.int32)
        self.nnz = len(uniq)

    def matrix(self, local: np.ndarray) -> sps.csr_matrix:
        data = backend.scatter_add(self.positions, local.ravel(), self.nnz)
        return sps.csr_matrix((data, self.indices.copy(), self.indptr.copy()), shape=self.shape)


def assemble_vector(dofs: np.ndarray, local: np.ndarray, n: int) -> np.ndarray:
    return np.bincount(dofs.ravel(), weights=local.ravel(), minlength=n)


def block_matrix(blocks) -> sps.csr_matrix:
    """``scipy.sparse.bmat`` that keeps explicit zeros and a full diagonal."""
    m = sps.bmat(blocks, format="coo")
    n = min(m.shape)
    rows = np.concatenate([m.row, np.arange(n)])
    cols = np.concatenate([m.col, np.arange(n)])
    data = np.concatenate([m.data, np.zeros(n)])
    out = sps.coo_matrix((data, (rows, cols)), shape=m.shape).tocsr()
    out.sum_duplicates()
    return out


Integrand = Union[float, int, str, ScalarExpr, Callable[[np.ndarray], np.ndarray], np.ndarray]


def _evaluate(integrand: Integrand, points: np.ndarray) -> np.ndarray:
    if isinstance(integrand, np.ndarray):
        return np.broadcast_to(integrand, points.shape[:-1])
    if isinstance(integrand, (int, float)):
        return np.full(points.shape[:-1], float(integrand))
    if isinstance(integrand, str):
        integrand = ScalarExpr(integrand)
    return np.asarray(integrand(points), dtype=float)


def integrate_cells(mesh, integrand: Integrand = 1.0, region: str = "all",
                    weight: Optional[np.ndarray] = None, degree: int = DEFAULT_DEGREE) -> float:
    """Mapped Gauss quadrature over all cells or the subdomain.

    ``integrand`` is a constant, an expression, a callable of the physical
    points (nc, nq, 2), or an array of values at the quadrature points.
    ``weight`` (e.g. the volume kernel) multiplies the measure pointwise.
    """
    geom = geometry(mesh, degree)
    vals = _evaluate(integrand, geom.points) * geom.wdet
    if weight is not None:
        vals = vals * weight
    if region == "all":
        return float(vals.sum())
    if region == "subdomain":
        return float(vals[mesh.subdomain].sum())
    raise ValueError(f"unknown region {region!r}")


def integrate_facets(mesh, integrand: Integrand = 1.0, tag=None,
                     weight: Optional[np.ndarray] = None, degree: int = DEFAULT_DEGREE) -> float:
    """Gauss quadrature over the boundary facets carrying ``tag`` (all if None)."""
    fg = facet_geometry(mesh, degree)
    sel = fg.mask(tag)
    vals = _evaluate(integrand, fg.points) * fg.wds
    if weight is not None:
        vals = vals * weight
    return float(vals[sel].sum())
