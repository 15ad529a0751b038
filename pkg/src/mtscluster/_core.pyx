# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled dynamic-programming kernels.

Mirrors ``_pycore`` function by function. Inputs are C-contiguous float64
``T x V`` matrices; ``band < 0`` means no Sakoe-Chiba constraint. All inner
loops run without the GIL so pairwise matrix fills can use threads.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport exp, log, log1p, expm1, sqrt, INFINITY
from libc.stdlib cimport malloc, free

cnp.import_array()


cdef inline double _sqdist(const double[:, ::1] x, const double[:, ::1] y,
                           Py_ssize_t i, Py_ssize_t j) noexcept nogil:
    cdef Py_ssize_t v
    cdef double s = 0.0, d
    for v in range(x.shape[1]):
        d = x[i, v] - y[j, v]
        s += d * d
    return s


cdef inline double _local(const double[:, ::1] x, const double[:, ::1] y,
                          Py_ssize_t i, Py_ssize_t j, bint squared) noexcept nogil:
    cdef double s = _sqdist(x, y, i, j)
    return s if squared else sqrt(s)


cdef inline double _min3(double a, double b, double c) noexcept nogil:
    if b < a:
        a = b
    if c < a:
        a = c
    return a


cdef void _dtw_fill(const double[:, ::1] x, const double[:, ::1] y, Py_ssize_t band,
                    bint squared, double[:, ::1] acc) noexcept nogil:
    # acc is (Tx+1) x (Ty+1) with a padded border
    cdef Py_ssize_t n = x.shape[0], m = y.shape[0], i, j, lo, hi
    for i in range(n + 1):
        for j in range(m + 1):
            acc[i, j] = INFINITY
    acc[0, 0] = 0.0
    for i in range(1, n + 1):
        lo = 1
        hi = m
        if band >= 0:
            if i - band > lo:
                lo = i - band
            if i + band < hi:
                hi = i + band
        for j in range(lo, hi + 1):
            acc[i, j] = _local(x, y, i - 1, j - 1, squared) + _min3(
                acc[i - 1, j - 1], acc[i - 1, j], acc[i, j - 1])


def dtw_distance(const double[:, ::1] x, const double[:, ::1] y, Py_ssize_t band,
                 bint squared):
    cdef Py_ssize_t n = x.shape[0], m = y.shape[0], i, j, lo, hi
    cdef double *prev
    cdef double *cur
    cdef double *tmp
    cdef double out
    prev = <double *> malloc((m + 1) * sizeof(double))
    cur = <double *> malloc((m + 1) * sizeof(double))
    if prev == NULL or cur == NULL:
        free(prev)
        free(cur)
        raise MemoryError()
    with nogil:
        for j in range(m + 1):
            prev[j] = INFINITY
        prev[0] = 0.0
        for i in range(1, n + 1):
            for j in range(m + 1):
                cur[j] = INFINITY
            lo = 1
            hi = m
            if band >= 0:
                if i - band > lo:
                    lo = i - band
                if i + band < hi:
                    hi = i + band
            for j in range(lo, hi + 1):
                cur[j] = _local(x, y, i - 1, j - 1, squared) + _min3(
                    prev[j - 1], prev[j], cur[j - 1])
            tmp = prev
            prev = cur
            cur = tmp
        out = prev[m]
    free(prev)
    free(cur)
    return out


def dtw_path(const double[:, ::1] x, const double[:, ::1] y, Py_ssize_t band,
             bint squared):
    cdef Py_ssize_t n = x.shape[0], m = y.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] acc_arr = np.empty((n + 1, m + 1))
    cdef double[:, ::1] acc = acc_arr
    cdef cnp.ndarray[cnp.int64_t, ndim=2] path_arr = np.empty((n + m, 2), dtype=np.int64)
    cdef cnp.int64_t[:, ::1] path = path_arr
    cdef Py_ssize_t i, j, k = 0
    cdef double dg, vt, hz
    with nogil:
        _dtw_fill(x, y, band, squared, acc)
        i = n
        j = m
        while True:
            path[k, 0] = i - 1
            path[k, 1] = j - 1
            k += 1
            if i == 1 and j == 1:
                break
            dg = acc[i - 1, j - 1]
            vt = acc[i - 1, j]
            hz = acc[i, j - 1]
            # tie order: diagonal, vertical, horizontal
            if dg <= vt and dg <= hz:
                i -= 1
                j -= 1
            elif vt <= hz:
                i -= 1
            else:
                j -= 1
    return acc[n, m], path_arr[k - 1::-1].copy()


def softdtw(const double[:, ::1] x, const double[:, ::1] y, double gamma,
            Py_ssize_t band, bint squared):
    cdef Py_ssize_t n = x.shape[0], m = y.shape[0], i, j, lo, hi
    cdef cnp.ndarray[cnp.float64_t, ndim=2] r_arr = np.full((n + 1, m + 1), np.inf)
    cdef double[:, ::1] r = r_arr
    cdef double a, b, c, mn, s
    with nogil:
        r[0, 0] = 0.0
        for i in range(1, n + 1):
            lo = 1
            hi = m
            if band >= 0:
                if i - band > lo:
                    lo = i - band
                if i + band < hi:
                    hi = i + band
            for j in range(lo, hi + 1):
                a = r[i - 1, j - 1]
                b = r[i - 1, j]
                c = r[i, j - 1]
                mn = _min3(a, b, c)
                s = 0.0
                if a < INFINITY:
                    s += exp(-(a - mn) / gamma)
                if b < INFINITY:
                    s += exp(-(b - mn) / gamma)
                if c < INFINITY:
                    s += exp(-(c - mn) / gamma)
                r[i, j] = _local(x, y, i - 1, j - 1, squared) + mn - gamma * log(s)
    return r[n, m]


cdef inline double _lse3(double a, double b, double c) noexcept nogil:
    cdef double mx = a
    if b > mx:
        mx = b
    if c > mx:
        mx = c
    if mx == -INFINITY:
        return -INFINITY
    return mx + log(exp(a - mx) + exp(b - mx) + exp(c - mx))


def gak_log(const double[:, ::1] x, const double[:, ::1] y, double sigma, Py_ssize_t band):
    cdef Py_ssize_t n = x.shape[0], m = y.shape[0], i, j, lo, hi
    cdef cnp.ndarray[cnp.float64_t, ndim=2] g_arr = np.full((n + 1, m + 1), -np.inf)
    cdef double[:, ::1] g = g_arr
    cdef double t, inv = 1.0 / (2.0 * sigma * sigma)
    with nogil:
        g[0, 0] = 0.0
        for i in range(1, n + 1):
            lo = 1
            hi = m
            if band >= 0:
                if i - band > lo:
                    lo = i - band
                if i + band < hi:
                    hi = i + band
            for j in range(lo, hi + 1):
                t = _sqdist(x, y, i - 1, j - 1) * inv
                # log kappa = -(t + log(2 - exp(-t)))
                g[i, j] = -(t + log1p(-expm1(-t))) + _lse3(
                    g[i - 1, j - 1], g[i - 1, j], g[i, j - 1])
    return g[n, m]
