# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels. Mirrors ``mpmo._fallback`` exactly."""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, INFINITY

cnp.import_array()


cdef inline int _compare(const double[:, ::1] A, Py_ssize_t i,
                         const double[:, ::1] B, Py_ssize_t k,
                         Py_ssize_t lo, Py_ssize_t hi) noexcept nogil:
    # 1: A[i] dominates B[k]; -1: B[k] dominates A[i]; 0 otherwise
    cdef bint a_better = False
    cdef bint b_better = False
    cdef Py_ssize_t c
    cdef double x, y
    for c in range(lo, hi):
        x = A[i, c]
        y = B[k, c]
        if x < y:
            a_better = True
        elif y < x:
            b_better = True
        if a_better and b_better:
            return 0
    if a_better:
        return 1
    if b_better:
        return -1
    return 0


def nd_rank(F):
    cdef const double[:, ::1] X = np.ascontiguousarray(F, dtype=np.float64)
    cdef Py_ssize_t n = X.shape[0], m = X.shape[1]
    cdef Py_ssize_t i, k, idx, q, r
    cdef int c
    cdef cnp.int64_t[::1] count = np.zeros(n, dtype=np.int64)
    cdef cnp.int64_t[::1] rank = np.full(n, -1, dtype=np.int64)
    # dominated-by lists in CSR form, built in two passes
    cdef cnp.int64_t[::1] deg = np.zeros(n + 1, dtype=np.int64)
    with nogil:
        for i in range(n):
            for k in range(i + 1, n):
                c = _compare(X, i, X, k, 0, m)
                if c == 1:
                    deg[i + 1] += 1
                    count[k] += 1
                elif c == -1:
                    deg[k + 1] += 1
                    count[i] += 1
        for i in range(n):
            deg[i + 1] += deg[i]
    cdef cnp.int64_t[::1] fill = np.array(deg[:n], dtype=np.int64)
    cdef cnp.int64_t[::1] adj = np.empty(max(deg[n], 1), dtype=np.int64)
    cdef cnp.int64_t[::1] front = np.empty(n, dtype=np.int64)
    cdef cnp.int64_t[::1] nxt = np.empty(n, dtype=np.int64)
    cdef Py_ssize_t nf = 0, nn
    with nogil:
        for i in range(n):
            for k in range(i + 1, n):
                c = _compare(X, i, X, k, 0, m)
                if c == 1:
                    adj[fill[i]] = k
                    fill[i] += 1
                elif c == -1:
                    adj[fill[k]] = i
                    fill[k] += 1
        for i in range(n):
            if count[i] == 0:
                front[nf] = i
                nf += 1
        r = 0
        while nf > 0:
            nn = 0
            for idx in range(nf):
                i = front[idx]
                rank[i] = r
                for q in range(deg[i], deg[i + 1]):
                    k = adj[q]
                    count[k] -= 1
                    if count[k] == 0:
                        nxt[nn] = k
                        nn += 1
            for idx in range(nn):
                front[idx] = nxt[idx]
            nf = nn
            r += 1
    return np.asarray(rank)


cdef inline bint _mp_dominates(const double[:, ::1] X, Py_ssize_t a, Py_ssize_t b,
                               const cnp.int64_t[::1] off, Py_ssize_t M) noexcept nogil:
    cdef Py_ssize_t j
    cdef int c
    cdef bint strict = False
    for j in range(M):
        c = _compare(X, a, X, b, off[j], off[j + 1])
        if c == -1:
            return False
        if c == 1:
            strict = True
    return strict


def mp_nd_mask(F, offsets):
    cdef const double[:, ::1] X = np.ascontiguousarray(F, dtype=np.float64)
    cdef const cnp.int64_t[::1] off = np.ascontiguousarray(offsets, dtype=np.int64)
    cdef Py_ssize_t n = X.shape[0], M = off.shape[0] - 1
    cdef Py_ssize_t i, j
    cdef cnp.uint8_t[::1] keep = np.ones(n, dtype=np.uint8)
    with nogil:
        for i in range(n):
            for j in range(n):
                if j != i and _mp_dominates(X, j, i, off, M):
                    keep[i] = 0
                    break
    return np.asarray(keep).astype(bool)


def igd_min_dist(R, S, offsets):
    cdef const double[:, ::1] A = np.ascontiguousarray(R, dtype=np.float64)
    cdef const double[:, ::1] B = np.ascontiguousarray(S, dtype=np.float64)
    cdef const cnp.int64_t[::1] off = np.ascontiguousarray(offsets, dtype=np.int64)
    cdef Py_ssize_t nr = A.shape[0], ns = B.shape[0], M = off.shape[0] - 1
    cdef Py_ssize_t i, k, j, c
    cdef double best, total, sq, d
    cdef double[::1] out = np.empty(nr, dtype=np.float64)
    with nogil:
        for i in range(nr):
            best = INFINITY
            for k in range(ns):
                total = 0.0
                for j in range(M):
                    sq = 0.0
                    for c in range(off[j], off[j + 1]):
                        d = A[i, c] - B[k, c]
                        sq = sq + d * d
                    total = total + sqrt(sq)
                    if total >= best:
                        break
                if total < best:
                    best = total
            out[i] = best
    return np.asarray(out)


def mc_dominated_count(samples, P):
    cdef const double[:, ::1] Z = np.ascontiguousarray(samples, dtype=np.float64)
    cdef const double[:, ::1] Q = np.ascontiguousarray(P, dtype=np.float64)
    cdef Py_ssize_t ns = Z.shape[0], npnt = Q.shape[0], m = Z.shape[1]
    cdef Py_ssize_t s, p, c
    cdef bint ok
    cdef long long count = 0
    if npnt == 0:
        return 0
    with nogil:
        for s in range(ns):
            for p in range(npnt):
                ok = True
                for c in range(m):
                    if Q[p, c] > Z[s, c]:
                        ok = False
                        break
                if ok:
                    count += 1
                    break
    return int(count)
