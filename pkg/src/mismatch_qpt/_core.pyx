# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled evaluation kernels.

Same contract as _core_py: out[cell] = sum_n w[n] * g[u1[n]] * g[u2[n]]
with g[k] = exp(-(diffs[k] . tau)^2 / 4).  Accumulation runs in table
order so the two backends agree to floating-point noise.
"""

import numpy as np

from libc.math cimport exp


def eval_cells_real(
    double[:, ::1] diffs,
    double[::1] tau,
    int[::1] u1,
    int[::1] u2,
    double[::1] w,
    int[::1] cell,
    int ncells,
):
    cdef Py_ssize_t k = diffs.shape[0]
    cdef Py_ssize_t d = diffs.shape[1]
    cdef Py_ssize_t n = u1.shape[0]
    g_arr = np.empty(k, dtype=np.float64)
    out_arr = np.zeros(ncells, dtype=np.float64)
    cdef double[::1] g = g_arr
    cdef double[::1] out = out_arr
    cdef Py_ssize_t i, j
    cdef double x
    for i in range(k):
        x = 0.0
        for j in range(d):
            x += diffs[i, j] * tau[j]
        g[i] = exp(-0.25 * x * x)
    for i in range(n):
        out[cell[i]] += w[i] * g[u1[i]] * g[u2[i]]
    return out_arr


def eval_cells_complex(
    double[:, ::1] diffs,
    double[::1] tau,
    int[::1] u1,
    int[::1] u2,
    double[::1] w_re,
    double[::1] w_im,
    int[::1] cell,
    int ncells,
):
    cdef Py_ssize_t k = diffs.shape[0]
    cdef Py_ssize_t d = diffs.shape[1]
    cdef Py_ssize_t n = u1.shape[0]
    g_arr = np.empty(k, dtype=np.float64)
    re_arr = np.zeros(ncells, dtype=np.float64)
    im_arr = np.zeros(ncells, dtype=np.float64)
    cdef double[::1] g = g_arr
    cdef double[::1] re = re_arr
    cdef double[::1] im = im_arr
    cdef Py_ssize_t i, j
    cdef double x, gg
    for i in range(k):
        x = 0.0
        for j in range(d):
            x += diffs[i, j] * tau[j]
        g[i] = exp(-0.25 * x * x)
    for i in range(n):
        gg = g[u1[i]] * g[u2[i]]
        re[cell[i]] += w_re[i] * gg
        im[cell[i]] += w_im[i] * gg
    return re_arr + 1j * im_arr
