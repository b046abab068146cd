"""Implicit equations F(x, y) = 0: domains, Jacobians, seed zeros.

The tracked zero set is represented implicitly: a point belongs to it iff it
is reachable from the seed by a successful lift inside the declared open
domains. Domains are open boxes (with a numerical boundary margin) or
arbitrary membership predicates.
"""

from __future__ import annotations

import numpy as np

from . import linalg
from .errors import (DimensionMismatch, DomainViolation, SeedNotOnZ,
                     SeedRankDeficient)

SEED_TOL = 1e-10
BOUNDARY_MARGIN = 1e-9
_SQRT_EPS = float(np.sqrt(np.finfo(np.float64).eps))


class Box:
    """Open product of intervals; +-inf entries make a side unbounded.

    Membership uses an absolute margin: points within ``BOUNDARY_MARGIN`` of a
    finite face count as outside, the numerical proxy for open-set semantics.
    """

    def __init__(self, lower, upper):
        self.lower = np.asarray(lower, dtype=np.float64).reshape(-1)
        self.upper = np.asarray(upper, dtype=np.float64).reshape(-1)
        if self.lower.shape != self.upper.shape:
            raise DimensionMismatch("box bounds must have equal length")
        if not np.all(self.lower < self.upper):
            raise ValueError("box needs lower < upper componentwise")
        # plain-float bounds: contains() sits in the tracer's inner loop
        self._lower_list = self.lower.tolist()
        self._upper_list = self.upper.tolist()

    @classmethod
    def unbounded(cls, dim):
        return cls(np.full(dim, -np.inf), np.full(dim, np.inf))

    @classmethod
    def from_intervals(cls, intervals):
        intervals = list(intervals)
        return cls([a for a, _ in intervals], [b for _, b in intervals])

    @property
    def dim(self):
        return self.lower.shape[0]

    def contains(self, z, margin=BOUNDARY_MARGIN):
        if isinstance(z, np.ndarray) and z.ndim == 1:
            values = z.tolist()
        else:
            values = np.asarray(z, dtype=np.float64).reshape(-1).tolist()
        if len(values) != len(self._lower_list):
            return False
        # non-finite values fail the chained comparison, including NaN;
        # -inf + margin stays -inf, so unbounded sides need no special case
        for value, lo, hi in zip(values, self._lower_list, self._upper_list):
            if not lo + margin < value < hi - margin:
                return False
        return True

    def finite_extent(self):
        """Largest finite side length, or None if every side is unbounded."""
        widths = self.upper - self.lower
        finite = widths[np.isfinite(widths)]
        return float(finite.max()) if finite.size else None

    def shrunk(self, fraction=0.05):
        """Sub-box pulled inward by `fraction` of each finite width (for sampling)."""
        lo = self.lower.copy()
        hi = self.upper.copy()
        for i in range(self.dim):
            if np.isfinite(lo[i]) and np.isfinite(hi[i]):
                pad = fraction * (hi[i] - lo[i])
                lo[i] += pad
                hi[i] -= pad
            else:
                lo[i] = max(lo[i], -10.0)
                hi[i] = min(hi[i], 10.0)
        return Box(lo, hi)

    def sample(self, rng, count=1):
        """Uniform samples from the shrunk box (finite windows on unbounded sides)."""
        inner = self.shrunk()
        return rng.uniform(inner.lower, inner.upper, size=(count, self.dim))

    def __repr__(self):
        pairs = ", ".join(f"({a:g}, {b:g})" for a, b in zip(self.lower, self.upper))
        return f"Box({pairs})"


def domain_contains(domain, z, margin=BOUNDARY_MARGIN):
    """Membership check for a Box, a predicate callable, or None (= all space)."""
    if domain is None:
        z = np.asarray(z, dtype=np.float64)
        return bool(np.isfinite(z).all())
    if isinstance(domain, Box):
        return domain.contains(z, margin)
    return bool(domain(np.asarray(z, dtype=np.float64)))


def finite_difference_jacobian(fn, v, domain, out_dim):
    """Columnwise derivative of fn at v with domain-aware stencils.

    Central differences with step sqrt(eps) * max(1, |v_i|); near a boundary
    the step shrinks, then falls back to one-sided stencils, then fails with
    DomainViolation.
    """
    v = np.asarray(v, dtype=np.float64).reshape(-1)
    jac = np.empty((out_dim, v.shape[0]))
    f0 = None
    for i in range(v.shape[0]):
        h0 = _SQRT_EPS * max(1.0, abs(v[i]))
        col = None
        for h in (h0, h0 / 4.0, h0 / 16.0):
            vp = v.copy()
            vp[i] += h
            vm = v.copy()
            vm[i] -= h
            if domain_contains(domain, vp) and domain_contains(domain, vm):
                col = (np.asarray(fn(vp)) - np.asarray(fn(vm))) / (2.0 * h)
                break
        if col is None:
            for sign in (1.0, -1.0):
                v1 = v.copy()
                v1[i] += sign * h0
                if not domain_contains(domain, v1):
                    continue
                if f0 is None:
                    f0 = np.asarray(fn(v))
                v2 = v.copy()
                v2[i] += 2.0 * sign * h0
                if domain_contains(domain, v2):
                    col = sign * (-3.0 * f0 + 4.0 * np.asarray(fn(v1))
                                  - np.asarray(fn(v2))) / (2.0 * h0)
                else:
                    col = (np.asarray(fn(v1)) - f0) / (sign * h0)
                break
        if col is None:
            raise DomainViolation(
                f"finite-difference stencil leaves the domain at coordinate {i}")
        jac[:, i] = col
    return jac


class ImplicitProblem:
    """F(x, y) = 0 with dimensions, domains, Jacobian evaluators and a seed.

    Immutable after construction; evaluators must be pure, which makes
    instances safe to share across concurrent traces.
    """

    def __init__(self, m, n, l, residual_fn, seed_x, seed_y, *,
                 jac_x_fn=None, jac_y_fn=None, domain_x=None, domain_y=None,
                 name=None, parameters=None):
        if m < 1 or n < 1 or l < 1:
            raise DimensionMismatch("dimensions must be positive")
        if l < n:
            raise DimensionMismatch(f"need l >= n, got l={l}, n={n}")
        self.m = int(m)
        self.n = int(n)
        self.l = int(l)
        self.residual_fn = residual_fn
        self.jac_x_fn = jac_x_fn
        self.jac_y_fn = jac_y_fn
        self.domain_x = Box.unbounded(m) if domain_x is None else domain_x
        self.domain_y = Box.unbounded(n) if domain_y is None else domain_y
        self.seed_x = np.asarray(seed_x, dtype=np.float64).reshape(-1).copy()
        self.seed_y = np.asarray(seed_y, dtype=np.float64).reshape(-1).copy()
        if self.seed_x.shape[0] != m or self.seed_y.shape[0] != n:
            raise DimensionMismatch("seed dimensions do not match (m, n)")
        if not self.contains_x(self.seed_x):
            raise DomainViolation("seed x lies outside the open x-domain")
        if not self.contains_y(self.seed_y):
            raise DomainViolation("seed y lies outside the open y-domain")
        self.name = name
        self.parameters = dict(parameters) if parameters else {}

    @property
    def seed(self):
        return self.seed_x.copy(), self.seed_y.copy()

    def contains_x(self, x):
        return domain_contains(self.domain_x, x)

    def contains_y(self, y):
        return domain_contains(self.domain_y, y)

    def _check_point(self, x, y):
        x = np.asarray(x, dtype=np.float64).reshape(-1)
        y = np.asarray(y, dtype=np.float64).reshape(-1)
        if x.shape[0] != self.m or y.shape[0] != self.n:
            raise DimensionMismatch(
                f"point dims ({x.shape[0]}, {y.shape[0]}) != ({self.m}, {self.n})")
        if not self.contains_x(x):
            raise DomainViolation(f"x={x} outside the open x-domain")
        if not self.contains_y(y):
            raise DomainViolation(f"y={y} outside the open y-domain")
        return x, y

    def residual(self, x, y):
        """F(x, y); raises DomainViolation off-domain."""
        x, y = self._check_point(x, y)
        r = np.asarray(self.residual_fn(x, y), dtype=np.float64).reshape(-1)
        if r.shape[0] != self.l:
            raise DimensionMismatch(f"residual has length {r.shape[0]}, expected {self.l}")
        return r

    def residual_norm(self, x, y):
        return float(np.linalg.norm(self.residual(x, y)))

    def jac_x(self, x, y):
        """d F / d x, analytic when provided, else finite differences."""
        x, y = self._check_point(x, y)
        if self.jac_x_fn is not None:
            j = np.asarray(self.jac_x_fn(x, y), dtype=np.float64).reshape(self.l, self.m)
            return j
        return finite_difference_jacobian(
            lambda xv: self.residual_fn(xv, y), x, self.domain_x, self.l)

    def jac_y(self, x, y):
        """d F / d y, analytic when provided, else finite differences."""
        x, y = self._check_point(x, y)
        if self.jac_y_fn is not None:
            j = np.asarray(self.jac_y_fn(x, y), dtype=np.float64).reshape(self.l, self.n)
            return j
        return finite_difference_jacobian(
            lambda yv: self.residual_fn(x, yv), y, self.domain_y, self.l)

    def __repr__(self):
        label = self.name or "anonymous"
        return f"ImplicitProblem({label}, m={self.m}, n={self.n}, l={self.l})"


def validate_seed(problem, seed_tol=SEED_TOL):
    """Check the seed is a zero with a left-invertible y-Jacobian.

    Raises SeedNotOnZ or SeedRankDeficient; returns the seed residual norm.
    """
    a, b = problem.seed
    rnorm = problem.residual_norm(a, b)
    if rnorm > seed_tol:
        raise SeedNotOnZ(f"seed residual {rnorm:.3e} exceeds {seed_tol:.1e}")
    sigmas = linalg.singular_values(problem.jac_y(a, b))
    smax = float(sigmas[0])
    smin = float(sigmas[-1])
    if smin <= linalg.rank_tolerance((problem.l, problem.n), smax):
        raise SeedRankDeficient(
            f"y-Jacobian at seed has sigma_min={smin:.3e}")
    return rnorm
