"""Pure-numpy element kernels, same contracts as the compiled ``coolshape._core``."""
from __future__ import annotations

import numpy as np


def weighted_stiffness(gt, gs, tensor, wdet):
    flux = np.einsum("cqab,cqjb->cqja", tensor * wdet[:, :, None, None], gs)
    return np.einsum("cqja,cqia->cij", flux, gt)


def weighted_mass(pt, ps, wdet):
    return np.einsum("cqi,cqj->cij", pt * wdet[:, :, None], ps)


def advection(pt, gs, beta):
    d = np.einsum("cqa,cqja->cqj", beta, gs)
    return np.einsum("cqj,cqi->cij", d, pt)


def scatter_add(positions, values, n):
    return np.bincount(positions, weights=values, minlength=n)
