# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner loops. Inputs are validated by :mod:`hulc.kernels`."""

import numpy as np
cimport numpy as cnp

cnp.import_array()


def pava(const double[::1] y, const double[::1] w):
    cdef Py_ssize_t n = y.shape[0]
    cdef Py_ssize_t i, j, k = 0, pos = 0
    cdef double ww
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] fit = out
    cdef double[::1] vals = np.empty(n, dtype=np.float64)
    cdef double[::1] wts = np.empty(n, dtype=np.float64)
    cdef Py_ssize_t[::1] cnt = np.empty(n, dtype=np.intp)
    with nogil:
        for i in range(n):
            vals[k] = y[i]
            wts[k] = w[i]
            cnt[k] = 1
            while k > 0 and vals[k - 1] > vals[k]:
                ww = wts[k - 1] + wts[k]
                vals[k - 1] = (wts[k - 1] * vals[k - 1] + wts[k] * vals[k]) / ww
                wts[k - 1] = ww
                cnt[k - 1] += cnt[k]
                k -= 1
            k += 1
        for i in range(k):
            for j in range(cnt[i]):
                fit[pos] = vals[i]
                pos += 1
    return out
