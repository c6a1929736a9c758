# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled memory-1 forward recursion over power classes.

Mirrors ``ForwardRecursion`` in ``forward.py`` for a single trajectory; the
state is an ``(L + 1) x L`` table over (previous class, current class), row
``L`` being the zero-power padding that precedes the first symbol.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport exp, log

cnp.import_array()


def forward_memory1(const double complex[::1] y,
                    const double complex[::1] atoms,
                    const double[::1] log_probs,
                    const cnp.int64_t[::1] class_start,
                    const double[::1] weights,
                    const cnp.int64_t[:, ::1] uidx,
                    const double[:, ::1] inv_v,
                    const double[:, ::1] log_pi_v):
    cdef Py_ssize_t n = y.shape[0]
    cdef Py_ssize_t n_atoms = atoms.shape[0]
    cdef Py_ssize_t L = weights.shape[0]
    cdef Py_ssize_t U = inv_v.shape[1]
    cdef Py_ssize_t k, a, b, c, i, j
    cdef double yr, yi, dr, di, d, t, shift, total, qab, coef, inv_wb
    cdef double[:, ::1] q = np.zeros((L + 1, L))
    cdef double[:, ::1] q_new = np.zeros((L + 1, L))
    cdef double[:, ::1] g = np.zeros((L, U))
    cdef double[:, ::1] tbuf = np.empty((n_atoms, U))
    cdef double[::1] acc = np.empty(L)
    cdef double[::1] colsum = np.empty(L)
    cdef const cnp.int64_t[::1] urow
    out = np.empty(n)
    cdef double[::1] out_v = out

    for c in range(L):
        q[L, c] = weights[c]

    for k in range(n):
        yr = y[k].real
        yi = y[k].imag

        # log p(x) + log f(y | x, u_j), then a single shift for the step
        shift = -1e308
        for b in range(L):
            for i in range(class_start[b], class_start[b + 1]):
                dr = yr - atoms[i].real
                di = yi - atoms[i].imag
                d = dr * dr + di * di
                for j in range(U):
                    t = log_probs[i] - d * inv_v[b, j] - log_pi_v[b, j]
                    tbuf[i, j] = t
                    if t > shift:
                        shift = t
        for b in range(L):
            for j in range(U):
                g[b, j] = 0.0
            for i in range(class_start[b], class_start[b + 1]):
                for j in range(U):
                    g[b, j] += exp(tbuf[i, j] - shift)

        total = 0.0
        if U == 1:
            for b in range(L):
                colsum[b] = 0.0
                for a in range(L + 1):
                    colsum[b] += q[a, b]
            for b in range(L):
                coef = g[b, 0] * colsum[b] / weights[b]
                for c in range(L):
                    q_new[b, c] = coef * weights[c]
                    total += q_new[b, c]
        else:
            for b in range(L):
                inv_wb = 1.0 / weights[b]
                for c in range(L):
                    acc[c] = 0.0
                for a in range(L + 1):
                    qab = q[a, b]
                    if qab == 0.0:
                        continue
                    urow = uidx[a]
                    for c in range(L):
                        acc[c] += qab * g[b, urow[c]]
                for c in range(L):
                    q_new[b, c] = acc[c] * weights[c] * inv_wb
                    total += q_new[b, c]

        if not total > 0.0:
            out_v[k] = -np.inf
            return out
        out_v[k] = log(total) + shift
        for b in range(L):
            for c in range(L):
                q[b, c] = q_new[b, c] / total
        for c in range(L):
            q[L, c] = 0.0

    return out
