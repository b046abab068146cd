# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""One-sided Jacobi SVD kernels for small dense matrices.

LAPACK dispatch overhead dominates runtime for the matrix sizes the tracer
touches (a handful of rows and columns, called once or more per continuation
step), so these loops pay off. Drop-in replacements for ``_pure``: same
signatures, same rank convention, same (None, smin, smax) failure protocol.
"""

import numpy as np

from libc.math cimport fabs, sqrt

cdef double EPS = 2.220446049250313e-16
cdef int MAX_SWEEPS = 60


cdef void _jacobi(double[:, ::1] w, double[:, ::1] v) noexcept nogil:
    """Rotate the columns of w to mutual orthogonality, accumulating into v.

    On exit w = A @ v where A is the original matrix, the columns of w are
    orthogonal, and the column norms of w are the singular values.
    """
    cdef Py_ssize_t l = w.shape[0]
    cdef Py_ssize_t n = w.shape[1]
    cdef Py_ssize_t i, j, k, sweep
    cdef double app, aqq, apq, tau, t, cs, sn, wi, wj
    cdef bint rotated
    for sweep in range(MAX_SWEEPS):
        rotated = False
        for i in range(n - 1):
            for j in range(i + 1, n):
                app = 0.0
                aqq = 0.0
                apq = 0.0
                for k in range(l):
                    wi = w[k, i]
                    wj = w[k, j]
                    app += wi * wi
                    aqq += wj * wj
                    apq += wi * wj
                if app == 0.0 or aqq == 0.0:
                    continue
                if fabs(apq) <= 0.5 * EPS * sqrt(app * aqq):
                    continue
                rotated = True
                tau = (aqq - app) / (2.0 * apq)
                if tau >= 0.0:
                    t = 1.0 / (tau + sqrt(1.0 + tau * tau))
                else:
                    t = -1.0 / (-tau + sqrt(1.0 + tau * tau))
                cs = 1.0 / sqrt(1.0 + t * t)
                sn = cs * t
                for k in range(l):
                    wi = w[k, i]
                    wj = w[k, j]
                    w[k, i] = cs * wi - sn * wj
                    w[k, j] = sn * wi + cs * wj
                for k in range(n):
                    wi = v[k, i]
                    wj = v[k, j]
                    v[k, i] = cs * wi - sn * wj
                    v[k, j] = sn * wi + cs * wj
        if not rotated:
            break


cdef void _column_norms(double[:, ::1] w, double[::1] sigma) noexcept nogil:
    cdef Py_ssize_t l = w.shape[0]
    cdef Py_ssize_t n = w.shape[1]
    cdef Py_ssize_t i, k
    cdef double acc
    for i in range(n):
        acc = 0.0
        for k in range(l):
            acc += w[k, i] * w[k, i]
        sigma[i] = sqrt(acc)


def singular_values(a):
    """All singular values of a (rows >= cols), descending."""
    w = np.array(a, dtype=np.float64, order="C", copy=True)
    cdef Py_ssize_t n = w.shape[1]
    v = np.eye(n)
    sigma = np.empty(n)
    cdef double[:, ::1] wv = w
    cdef double[:, ::1] vv = v
    cdef double[::1] sv = sigma
    with nogil:
        _jacobi(wv, vv)
        _column_norms(wv, sv)
    sigma[::-1].sort()
    return sigma


def left_inverse(a):
    """Moore-Penrose left inverse of a full-column-rank matrix (rows >= cols)."""
    w = np.array(a, dtype=np.float64, order="C", copy=True)
    cdef Py_ssize_t l = w.shape[0]
    cdef Py_ssize_t n = w.shape[1]
    v = np.eye(n)
    sigma = np.empty(n)
    out = np.zeros((n, l))
    cdef double[:, ::1] wv = w
    cdef double[:, ::1] vv = v
    cdef double[::1] sv = sigma
    cdef double[:, ::1] ov = out
    cdef Py_ssize_t i, j, k
    cdef double smin, smax, inv2
    with nogil:
        _jacobi(wv, vv)
        _column_norms(wv, sv)
        smin = sv[0]
        smax = sv[0]
        for j in range(1, n):
            if sv[j] < smin:
                smin = sv[j]
            if sv[j] > smax:
                smax = sv[j]
    if smin <= max(l, n) * EPS * smax:
        return None, smin, smax
    # S = V diag(1/sigma) U^T with U = W diag(1/sigma):
    # S[i, k] = sum_j v[i, j] * w[k, j] / sigma_j^2
    with nogil:
        for j in range(n):
            inv2 = 1.0 / (sv[j] * sv[j])
            for i in range(n):
                for k in range(l):
                    ov[i, k] += vv[i, j] * wv[k, j] * inv2
    return out, smin, smax


def solve_square(a, b):
    """Solve a @ x = b for square a via the Jacobi SVD."""
    return least_squares_step(a, b)


def least_squares_step(a, r):
    """left_inverse(a) @ r without materializing the inverse."""
    w = np.array(a, dtype=np.float64, order="C", copy=True)
    cdef Py_ssize_t l = w.shape[0]
    cdef Py_ssize_t n = w.shape[1]
    rr = np.ascontiguousarray(r, dtype=np.float64)
    v = np.eye(n)
    sigma = np.empty(n)
    out = np.zeros(n)
    cdef double[:, ::1] wv = w
    cdef double[:, ::1] vv = v
    cdef double[::1] sv = sigma
    cdef double[::1] rv = rr
    cdef double[::1] ov = out
    cdef Py_ssize_t i, j, k
    cdef double smin, smax, coeff
    with nogil:
        _jacobi(wv, vv)
        _column_norms(wv, sv)
        smin = sv[0]
        smax = sv[0]
        for j in range(1, n):
            if sv[j] < smin:
                smin = sv[j]
            if sv[j] > smax:
                smax = sv[j]
    if smin <= max(l, n) * EPS * smax:
        return None, smin, smax
    with nogil:
        for j in range(n):
            coeff = 0.0
            for k in range(l):
                coeff += wv[k, j] * rv[k]
            coeff /= sv[j] * sv[j]
            for i in range(n):
                ov[i] += vv[i, j] * coeff
    return out, smin, smax
