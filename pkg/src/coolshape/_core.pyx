# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled element kernels; see coolshape.fem._core_py for the reference versions."""
import numpy as np
cimport numpy as cnp

cnp.import_array()


def weighted_stiffness(const double[:, :, :, ::1] gt, const double[:, :, :, ::1] gs,
                       const double[:, :, :, ::1] tensor, const double[:, ::1] wdet):
    """out[c, i, j] = sum_q wdet[c, q] * (tensor[c, q] @ gs[c, q, j]) . gt[c, q, i]"""
    cdef Py_ssize_t nc = gt.shape[0], nq = gt.shape[1], nt = gt.shape[2], ns = gs.shape[2]
    cdef Py_ssize_t c, q, i, j
    cdef double w, a00, a01, a10, a11, tx, ty
    out_arr = np.zeros((nc, nt, ns))
    cdef double[:, :, ::1] out = out_arr
    with nogil:
        for c in range(nc):
            for q in range(nq):
                w = wdet[c, q]
                a00 = w * tensor[c, q, 0, 0]
                a01 = w * tensor[c, q, 0, 1]
                a10 = w * tensor[c, q, 1, 0]
                a11 = w * tensor[c, q, 1, 1]
                for j in range(ns):
                    tx = a00 * gs[c, q, j, 0] + a01 * gs[c, q, j, 1]
                    ty = a10 * gs[c, q, j, 0] + a11 * gs[c, q, j, 1]
                    for i in range(nt):
                        out[c, i, j] += tx * gt[c, q, i, 0] + ty * gt[c, q, i, 1]
    return out_arr


def weighted_mass(const double[:, :, ::1] pt, const double[:, :, ::1] ps, const double[:, ::1] wdet):
    """out[c, i, j] = sum_q wdet[c, q] * pt[c, q, i] * ps[c, q, j]"""
    cdef Py_ssize_t nc = pt.shape[0], nq = pt.shape[1], nt = pt.shape[2], ns = ps.shape[2]
    cdef Py_ssize_t c, q, i, j
    cdef double wi
    out_arr = np.zeros((nc, nt, ns))
    cdef double[:, :, ::1] out = out_arr
    with nogil:
        for c in range(nc):
            for q in range(nq):
                for i in range(nt):
                    wi = wdet[c, q] * pt[c, q, i]
                    for j in range(ns):
                        out[c, i, j] += wi * ps[c, q, j]
    return out_arr


def advection(const double[:, :, ::1] pt, const double[:, :, :, ::1] gs, const double[:, :, ::1] beta):
    """out[c, i, j] = sum_q (beta[c, q] . gs[c, q, j]) * pt[c, q, i]"""
    cdef Py_ssize_t nc = pt.shape[0], nq = pt.shape[1], nt = pt.shape[2], ns = gs.shape[2]
    cdef Py_ssize_t c, q, i, j
    cdef double d
    out_arr = np.zeros((nc, nt, ns))
    cdef double[:, :, ::1] out = out_arr
    with nogil:
        for c in range(nc):
            for q in range(nq):
                for j in range(ns):
                    d = beta[c, q, 0] * gs[c, q, j, 0] + beta[c, q, 1] * gs[c, q, j, 1]
                    for i in range(nt):
                        out[c, i, j] += d * pt[c, q, i]
    return out_arr


def scatter_add(const cnp.int64_t[::1] positions, const double[::1] values, Py_ssize_t n):
    """Sum ``values`` into an array of length ``n`` at ``positions`` (sequential order)."""
    cdef Py_ssize_t k, m = positions.shape[0]
    out_arr = np.zeros(n)
    cdef double[::1] out = out_arr
    with nogil:
        for k in range(m):
            out[positions[k]] += values[k]
    return out_arr
