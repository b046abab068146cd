"""numpy/LAPACK implementations of the small-matrix kernels.

Mirrors the interface of the compiled ``_kernels`` module. Rank decisions use
the standard numerical-rank convention max(rows, cols) * eps * sigma_max;
functions return ``(None, sigma_min, sigma_max)`` instead of raising so the
dispatching wrapper owns the error types.
"""

import numpy as np

EPS = float(np.finfo(np.float64).eps)


def _svd(a):
    u, s, vt = np.linalg.svd(a, full_matrices=False)
    return u, s, vt


def _rank_tol(shape, smax):
    return max(shape) * EPS * smax


def singular_values(a):
    """All singular values of a (rows >= cols), descending."""
    return np.linalg.svd(a, compute_uv=False)


def left_inverse(a):
    """Moore-Penrose left inverse of a full-column-rank matrix (rows >= cols)."""
    u, s, vt = _svd(a)
    smax = float(s[0])
    smin = float(s[-1])
    if smin <= _rank_tol(a.shape, smax):
        return None, smin, smax
    return (vt.T / s) @ u.T, smin, smax


def solve_square(a, b):
    """Solve a @ x = b for square a via SVD."""
    u, s, vt = _svd(a)
    smax = float(s[0])
    smin = float(s[-1])
    if smin <= _rank_tol(a.shape, smax):
        return None, smin, smax
    return vt.T @ ((u.T @ b) / s), smin, smax


def least_squares_step(a, r):
    """left_inverse(a) @ r without materializing the inverse."""
    u, s, vt = _svd(a)
    smax = float(s[0])
    smin = float(s[-1])
    if smin <= _rank_tol(a.shape, smax):
        return None, smin, smax
    return vt.T @ ((u.T @ r) / s), smin, smax
