# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled matrix-function kernels.

Each kernel takes a C-contiguous ``complex128`` array that has already been
validated by :mod:`qumulus.linalg.kernels` and returns a Python ``complex``.
The loops release the GIL, so batched evaluation on a thread pool scales.
"""

import numpy as np
cimport numpy as cnp
from libc.stdlib cimport malloc, free

cnp.import_array()

cdef extern from "complex.h" nogil:
    double complex csqrt(double complex)
    double cabs(double complex)

cdef extern int __builtin_ctzll(unsigned long long) nogil
cdef extern int __builtin_popcountll(unsigned long long) nogil


def permanent(double complex[:, ::1] a):
    """Ryser permanent with Gray-code row-sum updates, O(2^n n)."""
    cdef Py_ssize_t n = a.shape[0]
    cdef Py_ssize_t i, j
    cdef unsigned long long k, gray, prev, limit
    cdef double complex total = 0.0
    cdef double complex prod
    cdef double complex *rowsum
    if n == 0:
        return 1.0 + 0j
    rowsum = <double complex *> malloc(n * sizeof(double complex))
    if rowsum == NULL:
        raise MemoryError()
    with nogil:
        for i in range(n):
            rowsum[i] = 0.0
        limit = (<unsigned long long> 1) << n
        prev = 0
        for k in range(1, limit):
            gray = k ^ (k >> 1)
            j = __builtin_ctzll(k)
            if gray & ((<unsigned long long> 1) << j):
                for i in range(n):
                    rowsum[i] = rowsum[i] + a[i, j]
            else:
                for i in range(n):
                    rowsum[i] = rowsum[i] - a[i, j]
            prod = 1.0
            for i in range(n):
                prod = prod * rowsum[i]
            if __builtin_popcountll(gray) & 1:
                total = total - prod
            else:
                total = total + prod
        if n & 1:
            total = -total
    free(rowsum)
    return complex(total)


def hafnian(double complex[:, ::1] a):
    """Power-trace hafnian over subsets of index pairs, O(2^(n/2) n^4)."""
    cdef Py_ssize_t n = a.shape[0]
    cdef Py_ssize_t m = n // 2
    cdef Py_ssize_t i, j, l, p, k, size, q
    cdef unsigned long long s, limit
    cdef double complex total = 0.0
    cdef double complex acc
    cdef int *idx
    cdef double complex *c
    cdef double complex *pw
    cdef double complex *tmp
    cdef double complex *tr
    cdef double complex *coef
    if n == 0:
        return 1.0 + 0j
    idx = <int *> malloc(n * sizeof(int))
    c = <double complex *> malloc(n * n * sizeof(double complex))
    pw = <double complex *> malloc(n * n * sizeof(double complex))
    tmp = <double complex *> malloc(n * n * sizeof(double complex))
    tr = <double complex *> malloc((m + 1) * sizeof(double complex))
    coef = <double complex *> malloc((m + 1) * sizeof(double complex))
    if idx == NULL or c == NULL or pw == NULL or tmp == NULL or tr == NULL or coef == NULL:
        free(idx); free(c); free(pw); free(tmp); free(tr); free(coef)
        raise MemoryError()
    with nogil:
        limit = (<unsigned long long> 1) << m
        for s in range(1, limit):
            size = 0
            for j in range(m):
                if s & ((<unsigned long long> 1) << j):
                    idx[size] = 2 * j
                    idx[size + 1] = 2 * j + 1
                    size = size + 2
            # C = A_S X, where X swaps the two members of every pair
            for i in range(size):
                for j in range(size):
                    c[i * size + j] = a[idx[i], idx[j ^ 1]]
                    pw[i * size + j] = c[i * size + j]
            for p in range(1, m + 1):
                acc = 0.0
                for i in range(size):
                    acc = acc + pw[i * size + i]
                tr[p] = acc
                if p < m:
                    for i in range(size):
                        for j in range(size):
                            acc = 0.0
                            for l in range(size):
                                acc = acc + pw[i * size + l] * c[l * size + j]
                            tmp[i * size + j] = acc
                    for q in range(size * size):
                        pw[q] = tmp[q]
            # coefficient of eta^m in exp(sum_p tr_p eta^p / (2p))
            coef[0] = 1.0
            for k in range(1, m + 1):
                acc = 0.0
                for p in range(1, k + 1):
                    acc = acc + tr[p] * coef[k - p]
                coef[k] = acc / (2.0 * k)
            if (m - size // 2) & 1:
                total = total - coef[m]
            else:
                total = total + coef[m]
    free(idx); free(c); free(pw); free(tmp); free(tr); free(coef)
    return complex(total)


cdef double complex _det_lu(double complex *w, Py_ssize_t n) nogil:
    """Determinant by in-place LU with partial pivoting."""
    cdef Py_ssize_t i, j, k, piv
    cdef double complex det = 1.0
    cdef double complex f, t
    cdef double best, v
    for k in range(n):
        piv = k
        best = cabs(w[k * n + k])
        for i in range(k + 1, n):
            v = cabs(w[i * n + k])
            if v > best:
                best = v
                piv = i
        if best == 0.0:
            return 0.0
        if piv != k:
            for j in range(n):
                t = w[k * n + j]
                w[k * n + j] = w[piv * n + j]
                w[piv * n + j] = t
            det = -det
        det = det * w[k * n + k]
        for i in range(k + 1, n):
            f = w[i * n + k] / w[k * n + k]
            for j in range(k + 1, n):
                w[i * n + j] = w[i * n + j] - f * w[k * n + j]
    return det


def torontonian(double complex[:, ::1] o):
    """Inclusion-exclusion torontonian over mode subsets, O(2^m m^3)."""
    cdef Py_ssize_t n = o.shape[0]
    cdef Py_ssize_t m = n // 2
    cdef Py_ssize_t i, j, size
    cdef unsigned long long s, limit
    cdef double complex total = 0.0
    cdef double complex term
    cdef int *idx
    cdef double complex *w
    if n == 0:
        return 1.0 + 0j
    idx = <int *> malloc(n * sizeof(int))
    w = <double complex *> malloc(n * n * sizeof(double complex))
    if idx == NULL or w == NULL:
        free(idx); free(w)
        raise MemoryError()
    with nogil:
        limit = (<unsigned long long> 1) << m
        for s in range(limit):
            size = 0
            for j in range(m):
                if s & ((<unsigned long long> 1) << j):
                    idx[size] = j
                    size = size + 1
            for j in range(size):
                idx[size + j] = idx[j] + m
            size = 2 * size
            if size == 0:
                term = 1.0
            else:
                for i in range(size):
                    for j in range(size):
                        w[i * size + j] = -o[idx[i], idx[j]]
                    w[i * size + i] = w[i * size + i] + 1.0
                term = 1.0 / csqrt(_det_lu(w, size))
            if (m - size // 2) & 1:
                total = total - term
            else:
                total = total + term
    free(idx); free(w)
    return complex(total)
