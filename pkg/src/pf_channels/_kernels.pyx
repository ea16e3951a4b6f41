# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled twins of ``_kernels_py``: partition enumeration and vertex separators."""

import numpy as np

from libc.math cimport sqrt


cdef bint _deficient(double complex[:, ::1] vecs, long mask, bint want_set,
                     int n, int d, double tol, double complex[:, ::1] basis,
                     double complex[::1] r):
    cdef int i, t, b, rep
    cdef int nb = 0
    cdef double complex c
    cdef double nrm2, s
    for i in range(n):
        if ((mask >> i) & 1) != want_set:
            continue
        for t in range(d):
            r[t] = vecs[i, t]
        for rep in range(2):
            for b in range(nb):
                c = 0
                for t in range(d):
                    c = c + basis[b, t].conjugate() * r[t]
                for t in range(d):
                    r[t] = r[t] - c * basis[b, t]
        nrm2 = 0
        for t in range(d):
            nrm2 += r[t].real * r[t].real + r[t].imag * r[t].imag
        if nrm2 > tol:
            s = sqrt(nrm2)
            for t in range(d):
                basis[nb, t] = r[t] / s
            nb += 1
            if nb == d:
                return False
    return nb < d


def first_extending_partition(us, vs, double tol):
    cdef double complex[:, ::1] u = np.ascontiguousarray(us, dtype=np.complex128)
    cdef double complex[:, ::1] v = np.ascontiguousarray(vs, dtype=np.complex128)
    cdef int n = u.shape[0]
    cdef int d1 = u.shape[1]
    cdef int d2 = v.shape[1]
    cdef int dmax = d1 if d1 > d2 else d2
    cdef double complex[:, ::1] basis = np.zeros((max(dmax, 1), max(dmax, 1)), dtype=np.complex128)
    cdef double complex[::1] r = np.zeros(max(dmax, 1), dtype=np.complex128)
    cdef long mask
    cdef long total = 1 << n
    for mask in range(total):
        if not _deficient(u, mask, True, n, d1, tol, basis, r):
            continue
        if _deficient(v, mask, False, n, d2, tol, basis, r):
            return mask
    return -1


cdef bint _connected_without(unsigned char[:, ::1] adj, unsigned char[::1] removed,
                             int n, int[::1] stack, unsigned char[::1] seen):
    cdef int i, a, b, top = 0, alive = 0, first = -1, count = 0
    for i in range(n):
        seen[i] = 0
        if not removed[i]:
            alive += 1
            if first < 0:
                first = i
    if alive <= 1:
        return True
    stack[0] = first
    top = 1
    seen[first] = 1
    count = 1
    while top > 0:
        top -= 1
        a = stack[top]
        for b in range(n):
            if adj[a, b] and not removed[b] and not seen[b]:
                seen[b] = 1
                count += 1
                stack[top] = b
                top += 1
    return count == alive


def find_separator(adj_in, int size):
    cdef unsigned char[:, ::1] adj = np.ascontiguousarray(adj_in, dtype=np.uint8)
    cdef int n = adj.shape[0]
    cdef unsigned char[::1] removed = np.zeros(max(n, 1), dtype=np.uint8)
    cdef unsigned char[::1] seen = np.zeros(max(n, 1), dtype=np.uint8)
    cdef int[::1] stack = np.zeros(max(n, 1), dtype=np.intc)
    cdef int[::1] idx = np.zeros(max(size, 1), dtype=np.intc)
    cdef int i, j
    if size > n:
        return None
    # iterate size-combinations of range(n) in lexicographic order
    for i in range(size):
        idx[i] = i
    while True:
        for i in range(n):
            removed[i] = 0
        for i in range(size):
            removed[idx[i]] = 1
        if not _connected_without(adj, removed, n, stack, seen):
            return [int(idx[i]) for i in range(size)]
        i = size - 1
        while i >= 0 and idx[i] == i + n - size:
            i -= 1
        if i < 0:
            return None
        idx[i] += 1
        for j in range(i + 1, size):
            idx[j] = idx[j - 1] + 1
