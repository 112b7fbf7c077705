"""Gauss rules on the reference triangle and the unit interval."""
from __future__ import annotations

import math
from functools import lru_cache

import numpy as np
from scipy.special import roots_jacobi, roots_legendre


@lru_cache(maxsize=None)
def triangle_rule(degree: int) -> tuple[np.ndarray, np.ndarray]:
    """Collapsed Gauss-Jacobi rule exact for polynomials of total ``degree``.

    Reference triangle (0,0), (1,0), (0,1); the weights sum to 1/2.
    """
    n = max(1, math.ceil((degree + 1) / 2))
    xi, wj = roots_jacobi(n, 1.0, 0.0)
    eta, wl = roots_legendre(n)
    u = 0.5 * (1.0 + xi)
    v = 0.5 * (1.0 + eta)
    uu, vv = np.meshgrid(u, v, indexing="ij")
    pts = np.stack([uu.ravel(), ((1.0 - uu) * vv).ravel()], axis=1)
    w = np.outer(wj / 4.0, wl / 2.0).ravel()
    pts.setflags(write=False)
    w.setflags(write=False)
    return pts, w


@lru_cache(maxsize=None)
def line_rule(degree: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre rule on [0, 1]; weights sum to 1."""
    n = max(1, math.ceil((degree + 1) / 2))
    x, w = roots_legendre(n)
    s, ws = 0.5 * (x + 1.0), 0.5 * w
    s.setflags(write=False)
    ws.setflags(write=False)
    return s, ws
