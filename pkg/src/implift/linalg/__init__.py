"""Dense small-matrix kernels: left inverses, singular values, linear solves.

Two interchangeable backends provide the raw routines: a compiled Cython
extension used when importable, and a numpy fallback. The choice happens at
import time; ``use_backend`` switches at runtime (handy for benchmarks and
tests). Set ``IMPLIFT_PURE_PYTHON=1`` to skip the extension.

All operations are pure functions of their inputs and safe for concurrent
use; only ``use_backend`` mutates module state.
"""

import os

import numpy as np

from ..errors import DimensionMismatch, NonFiniteInput, RankDeficient
from . import _pure

EPS = _pure.EPS

_BACKENDS = {"pure": _pure}
try:
    from . import _kernels
except ImportError:
    _kernels = None
else:
    _BACKENDS["compiled"] = _kernels

if os.environ.get("IMPLIFT_PURE_PYTHON", "0") not in ("", "0"):
    _active_name = "pure"
elif "compiled" in _BACKENDS:
    _active_name = "compiled"
else:
    _active_name = "pure"
_active = _BACKENDS[_active_name]


def available_backends():
    """Names of the importable backends."""
    return tuple(sorted(_BACKENDS))


def current_backend():
    return _active_name


def use_backend(name):
    """Select the kernel backend ('compiled' or 'pure') for later calls."""
    global _active, _active_name
    if name not in _BACKENDS:
        raise ValueError(f"unknown backend {name!r}; available: {available_backends()}")
    _active_name = name
    _active = _BACKENDS[name]


def _as_matrix(a, name="matrix"):
    m = np.ascontiguousarray(a, dtype=np.float64)
    if m.ndim != 2 or m.shape[0] == 0 or m.shape[1] == 0:
        raise DimensionMismatch(f"{name} must be 2-d and nonempty, got shape {m.shape}")
    if not np.isfinite(m).all():
        raise NonFiniteInput(f"{name} contains non-finite entries")
    return m


def _as_vector(b, length, name="vector"):
    v = np.ascontiguousarray(b, dtype=np.float64).reshape(-1)
    if v.shape[0] != length:
        raise DimensionMismatch(f"{name} must have length {length}, got {v.shape[0]}")
    if not np.isfinite(v).all():
        raise NonFiniteInput(f"{name} contains non-finite entries")
    return v


def rank_tolerance(shape, sigma_max):
    """Numerical-rank cutoff: max(rows, cols) * eps * sigma_max."""
    return max(shape) * EPS * sigma_max


def singular_values(a):
    """All singular values of a, in descending order."""
    m = _as_matrix(a)
    if m.shape[0] < m.shape[1]:
        m = np.ascontiguousarray(m.T)
    return np.asarray(_active.singular_values(m))


def spectral_norm(a):
    """Largest singular value (operator 2-norm)."""
    return float(singular_values(a)[0])


def smallest_singular_value(a):
    """Smallest singular value of a."""
    return float(singular_values(a)[-1])


def left_inverse(j):
    """Moore-Penrose left inverse S of a full-column-rank matrix.

    S satisfies S @ j = identity up to roundoff and has minimal operator norm
    among all left inverses. Requires rows >= cols; raises RankDeficient when
    the smallest singular value falls below the numerical-rank cutoff.
    """
    m = _as_matrix(j)
    l, n = m.shape
    if l < n:
        raise DimensionMismatch(f"left inverse needs rows >= cols, got {l}x{n}")
    s, smin, smax = _active.left_inverse(m)
    if s is None:
        raise RankDeficient(smin)
    return np.asarray(s)


def solve_square(a, b):
    """Solve a @ x = b for square invertible a."""
    m = _as_matrix(a)
    k1, k2 = m.shape
    if k1 != k2:
        raise DimensionMismatch(f"solve_square needs a square matrix, got {k1}x{k2}")
    v = _as_vector(b, k1, "right-hand side")
    x, smin, smax = _active.solve_square(m, v)
    if x is None:
        raise RankDeficient(smin)
    return np.asarray(x)


def least_squares_step(j, r):
    """left_inverse(j) @ r, fused (the corrector's hot path)."""
    m = _as_matrix(j)
    l, n = m.shape
    if l < n:
        raise DimensionMismatch(f"least_squares_step needs rows >= cols, got {l}x{n}")
    v = _as_vector(r, l, "residual")
    x, smin, smax = _active.least_squares_step(m, v)
    if x is None:
        raise RankDeficient(smin)
    return np.asarray(x)
