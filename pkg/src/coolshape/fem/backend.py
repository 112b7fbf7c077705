"""Kernel backend selection and chunked (optionally threaded) execution.

The compiled extension ``coolshape._core`` is used when it imports; set
``COOLSHAPE_BACKEND=python`` to force the numpy fallback.  Both backends sum
in the same order, so results agree bit for bit.
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import _core_py


def _load(name: str):
    if name == "python":
        return _core_py, "python"
    try:
        from .. import _core
    except ImportError:
        if name == "compiled":
            raise
        return _core_py, "python"
    return _core, "compiled"


_impl, BACKEND = _load(os.environ.get("COOLSHAPE_BACKEND", "auto"))
_threads = 1


def use_backend(name: str) -> str:
    """Switch to ``"compiled"``, ``"python"`` or ``"auto"``; returns the active name."""
    global _impl, BACKEND
    _impl, BACKEND = _load(name)
    return BACKEND


def set_threads(n: int) -> None:
    global _threads
    if n < 1:
        raise ValueError("thread count must be >= 1")
    _threads = int(n)


def get_threads() -> int:
    return _threads


def _c(a) -> np.ndarray:
    return np.ascontiguousarray(a, dtype=float)


def _chunked(fn, arrays, nc):
    if _threads == 1 or nc < 2 * _threads:
        return fn(*arrays)
    bounds = np.linspace(0, nc, _threads + 1).astype(int)
    parts = [[np.ascontiguousarray(a[lo:hi]) for a in arrays] for lo, hi in zip(bounds[:-1], bounds[1:])]
    with ThreadPoolExecutor(_threads) as pool:
        results = list(pool.map(lambda args: fn(*args), parts))
    return np.concatenate(results)


def weighted_stiffness(gt, gs, tensor, wdet):
    nc = gt.shape[0]
    return _chunked(_impl.weighted_stiffness, (_c(gt), _c(gs), _c(tensor), _c(wdet)), nc)


def weighted_mass(pt, ps, wdet):
    nc = pt.shape[0]
    return _chunked(_impl.weighted_mass, (_c(pt), _c(ps), _c(wdet)), nc)


def advection(pt, gs, beta):
    nc = pt.shape[0]
    return _chunked(_impl.advection, (_c(pt), _c(gs), _c(beta)), nc)


def scatter_add(positions, values, n):
    return _impl.scatter_add(np.ascontiguousarray(positions, dtype=np.int64), _c(values), n)
