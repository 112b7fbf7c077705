"""Lagrange P1/P2 shape functions on the reference triangle.

Local numbering: vertices 0, 1, 2, then (P2) the midpoints of the edges
opposite vertices 0, 1, 2.
"""
from __future__ import annotations

import numpy as np

REF_VERTICES = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
_DLAMBDA = np.array([[-1.0, -1.0], [1.0, 0.0], [0.0, 1.0]])


def _barycentric(ref: np.ndarray) -> np.ndarray:
    r = np.asarray(ref, dtype=float)
    return np.stack([1.0 - r[..., 0] - r[..., 1], r[..., 0], r[..., 1]], axis=-1)


def basis_values(degree: int, ref: np.ndarray) -> np.ndarray:
    lam = _barycentric(ref)
    if degree == 1:
        return lam
    if degree != 2:
        raise ValueError(f"unsupported degree {degree}")
    l0, l1, l2 = lam[..., 0], lam[..., 1], lam[..., 2]
    return np.stack([l0 * (2 * l0 - 1), l1 * (2 * l1 - 1), l2 * (2 * l2 - 1),
                     4 * l1 * l2, 4 * l2 * l0, 4 * l0 * l1], axis=-1)


def basis_gradients(degree: int, ref: np.ndarray) -> np.ndarray:
    """Reference gradients, shape ``ref.shape[:-1] + (nloc, 2)``."""
    lam = _barycentric(ref)
    shape = lam.shape[:-1]
    if degree == 1:
        return np.broadcast_to(_DLAMBDA, shape + (3, 2)).copy()
    if degree != 2:
        raise ValueError(f"unsupported degree {degree}")
    out = np.empty(shape + (6, 2))
    for k in range(3):
        out[..., k, :] = (4 * lam[..., k] - 1)[..., None] * _DLAMBDA[k]
    for k, (a, b) in enumerate([(1, 2), (2, 0), (0, 1)]):
        out[..., 3 + k, :] = 4 * (lam[..., a][..., None] * _DLAMBDA[b] + lam[..., b][..., None] * _DLAMBDA[a])
    return out


def n_local(degree: int) -> int:
    return 3 if degree == 1 else 6
