# cython: boundscheck=False, wraparound=False, cdivision=True
# Compiled inner loops. Semantics are pinned by shiftlab._kernels._pure;
# tests assert bit-level agreement within floating tolerance.

import numpy as np

cimport numpy as cnp
from libc.math cimport exp, log

cnp.import_array()

cdef double LOG_PI = 1.1447298858494001741


def mixture_logpdf(double complex[:, ::1] z,
                   double complex[:, ::1] means,
                   double[::1] logw,
                   double[::1] out):
    """Per-row log of sum_a exp(logw[a] - ||z[i] - means[a]||^2) - p*log(pi)."""
    cdef Py_ssize_t n = z.shape[0]
    cdef Py_ssize_t p = z.shape[1]
    cdef Py_ssize_t na = means.shape[0]
    cdef Py_ssize_t i, a, k
    cdef double best, acc, d2, dre, dim_
    cdef double[::1] row = np.empty(na, dtype=np.float64)

    for i in range(n):
        best = -1e300
        for a in range(na):
            d2 = 0.0
            for k in range(p):
                dre = z[i, k].real - means[a, k].real
                dim_ = z[i, k].imag - means[a, k].imag
                d2 += dre * dre + dim_ * dim_
            row[a] = logw[a] - d2
            if row[a] > best:
                best = row[a]
        acc = 0.0
        for a in range(na):
            acc += exp(row[a] - best)
        out[i] = best + log(acc) - p * LOG_PI
