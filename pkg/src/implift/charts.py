"""Coordinate charts (diffeomorphisms) and chart-transformed problems.

Charts identify the projections of the zero set with full Euclidean space.
Surjectivity is not verifiable from finite samples and is treated as a trust
assumption; ``chart_roundtrip_check`` audits what can be sampled: inverse
consistency and Jacobian invertibility.
"""

from __future__ import annotations

import dataclasses

import numpy as np
from scipy.optimize import brentq

from . import linalg
from .errors import (ChartDomainMismatch, DimensionMismatch, NonMonotone,
                     RankDeficient)
from .problem import (Box, ImplicitProblem, domain_contains,
                      finite_difference_jacobian)

ROUNDTRIP_TOL = 1e-8
JACOBIAN_CONSISTENCY_TOL = 1e-5


class Chart:
    """Invertible differentiable coordinate map on an open domain.

    ``forward`` maps the domain into R^dim, ``inverse`` undoes it, and
    ``jac_forward`` (optional) returns the dim x dim Jacobian of ``forward``;
    finite differences fill in when it is absent.
    """

    def __init__(self, dim, forward, inverse, jac_forward=None, domain=None,
                 name=None):
        self.dim = int(dim)
        self.forward = forward
        self.inverse = inverse
        self.jac_forward = jac_forward
        self.domain = domain
        self.name = name or "chart"

    def contains(self, p):
        return domain_contains(self.domain, p)

    def forward_point(self, p):
        p = np.asarray(p, dtype=np.float64).reshape(-1)
        if p.shape[0] != self.dim:
            raise DimensionMismatch(f"chart dim {self.dim}, point dim {p.shape[0]}")
        return np.asarray(self.forward(p), dtype=np.float64).reshape(-1)

    def inverse_point(self, q):
        q = np.asarray(q, dtype=np.float64).reshape(-1)
        if q.shape[0] != self.dim:
            raise DimensionMismatch(f"chart dim {self.dim}, point dim {q.shape[0]}")
        return np.asarray(self.inverse(q), dtype=np.float64).reshape(-1)

    def jac(self, p):
        p = np.asarray(p, dtype=np.float64).reshape(-1)
        if self.jac_forward is not None:
            return np.asarray(self.jac_forward(p), dtype=np.float64).reshape(self.dim, self.dim)
        return finite_difference_jacobian(self.forward, p, self.domain, self.dim)

    def __repr__(self):
        return f"Chart({self.name}, dim={self.dim})"


@dataclasses.dataclass
class ChartPair:
    """Charts for the x-projection (phi, dim m) and y-projection (psi, dim n)."""

    phi: Chart
    psi: Chart

    def matches(self, problem):
        return self.phi.dim == problem.m and self.psi.dim == problem.n


def identity_chart(dim):
    eye = np.eye(dim)
    return Chart(dim, lambda p: p.copy(), lambda q: q.copy(),
                 jac_forward=lambda p: eye.copy(), name="identity")


def affine_chart(matrix, offset=None):
    """p -> A p + b with invertible A."""
    a = np.asarray(matrix, dtype=np.float64)
    dim = a.shape[0]
    if a.shape != (dim, dim):
        raise DimensionMismatch("affine chart matrix must be square")
    b = np.zeros(dim) if offset is None else np.asarray(offset, dtype=np.float64).reshape(-1)
    if b.shape[0] != dim:
        raise DimensionMismatch("affine chart offset length mismatch")
    a_inv = np.linalg.inv(a)  # raises LinAlgError for singular input
    return Chart(dim,
                 lambda p: a @ p + b,
                 lambda q: a_inv @ (q - b),
                 jac_forward=lambda p: a.copy(),
                 name="affine")


def tangent_box_chart(lower, upper):
    """Componentwise tan map sending an open box onto all of R^dim.

    t_i -> tan(pi (2 t_i - a_i - b_i) / (2 (b_i - a_i)))
    """
    box = Box(lower, upper)
    a = box.lower
    b = box.upper
    if not np.isfinite(a).all() or not np.isfinite(b).all():
        raise ValueError("tangent-box chart needs a finite box")
    width = b - a
    scale = np.pi / width

    def forward(p):
        return np.tan(scale * (2.0 * p - a - b) / 2.0)

    def inverse(q):
        return (a + b) / 2.0 + np.arctan(q) / scale

    def jac_forward(p):
        u = np.tan(scale * (2.0 * p - a - b) / 2.0)
        return np.diag(scale * (1.0 + u * u))

    return Chart(box.dim, forward, inverse, jac_forward=jac_forward,
                 domain=box, name="tangent-box")


def psi_from_scalar_solution(phi, f, f_prime=None, domain=None, samples=256):
    """Compose a scalar x-chart with the solved relation: psi = phi o f.

    ``f`` must be strictly monotone and differentiable on the (scalar) domain;
    a sampled derivative sign change raises NonMonotone. The inverse solves
    f(v) = phi^{-1}(s) by bracketed root finding.
    """
    if phi.dim != 1:
        raise DimensionMismatch("scalar-solution composition needs a 1-d chart")
    if domain is None:
        domain = Box.unbounded(1)
    if isinstance(domain, tuple):
        domain = Box.from_intervals([domain])

    def fval(v):
        return float(np.asarray(f(float(v))).reshape(()))

    if f_prime is not None:
        def fslope(v):
            return float(np.asarray(f_prime(float(v))).reshape(()))
    else:
        def fslope(v):
            h = 1e-6 * max(1.0, abs(v))
            return (fval(v + h) - fval(v - h)) / (2.0 * h)

    if isinstance(domain, Box):
        lo = max(float(domain.lower[0]), -1e3)
        hi = min(float(domain.upper[0]), 1e3)
    else:
        lo, hi = -1e3, 1e3
    pad = 1e-9 * max(1.0, hi - lo)
    grid = np.linspace(lo + pad, hi - pad, samples)
    slopes = np.array([fslope(v) for v in grid])
    if np.any(slopes == 0.0) or (slopes.max() > 0.0 and slopes.min() < 0.0):
        raise NonMonotone("sampled derivative of f changes sign or vanishes")

    def forward(p):
        return phi.forward_point(np.array([fval(p[0])]))

    def inverse(q):
        target = float(phi.inverse_point(q)[0])
        bracket_lo, bracket_hi = _monotone_bracket(fval, target, lo, hi)
        root = brentq(lambda v: fval(v) - target, bracket_lo, bracket_hi,
                      xtol=1e-14, rtol=8.9e-16)
        return np.array([root])

    def jac_forward(p):
        v = float(p[0])
        w = np.array([fval(v)])
        return phi.jac(w) * fslope(v)

    return Chart(1, forward, inverse, jac_forward=jac_forward, domain=domain,
                 name=f"{phi.name}-of-solution")


def _monotone_bracket(fval, target, lo, hi):
    """Bracket f(v) = target for monotone f on (lo, hi)."""
    flo = fval(lo) - target
    fhi = fval(hi) - target
    if flo == 0.0:
        return lo, lo + 1e-15
    if fhi == 0.0:
        return hi - 1e-15, hi
    if flo * fhi > 0.0:
        raise ChartDomainMismatch(
            f"target {target:.6g} outside the range of f on ({lo:.6g}, {hi:.6g})")
    return lo, hi


@dataclasses.dataclass
class ChartCheckReport:
    """Sampled diffeomorphism audit: roundtrip error and Jacobian consistency."""

    samples_checked: int
    max_roundtrip_error: float
    worst_roundtrip_at: np.ndarray
    max_jacobian_error: float
    worst_jacobian_at: np.ndarray
    min_jacobian_sigma: float
    min_sigma_at: np.ndarray

    @property
    def roundtrip_ok(self):
        return self.max_roundtrip_error <= ROUNDTRIP_TOL

    @property
    def jacobian_ok(self):
        return (self.max_jacobian_error <= JACOBIAN_CONSISTENCY_TOL
                and self.min_jacobian_sigma > 0.0)

    @property
    def ok(self):
        return self.roundtrip_ok and self.jacobian_ok


def chart_roundtrip_check(chart, points):
    """Audit inverse(forward(p)) = p and D(forward) x D(inverse) = I on samples."""
    points = np.atleast_2d(np.asarray(points, dtype=np.float64))
    worst_rt, worst_rt_at = -1.0, points[0]
    worst_jac, worst_jac_at = -1.0, points[0]
    min_sigma, min_sigma_at = np.inf, points[0]
    eye = np.eye(chart.dim)
    for p in points:
        q = chart.forward_point(p)
        back = chart.inverse_point(q)
        err = float(np.linalg.norm(back - p)) / max(1.0, float(np.linalg.norm(p)))
        if err > worst_rt:
            worst_rt, worst_rt_at = err, p
        jac = chart.jac(p)
        sigma = linalg.smallest_singular_value(jac)
        if sigma < min_sigma:
            min_sigma, min_sigma_at = sigma, p
        inv_jac = finite_difference_jacobian(chart.inverse, q, None, chart.dim)
        jerr = float(np.linalg.norm(jac @ inv_jac - eye))
        if jerr > worst_jac:
            worst_jac, worst_jac_at = jerr, p
    return ChartCheckReport(
        samples_checked=points.shape[0],
        max_roundtrip_error=worst_rt,
        worst_roundtrip_at=worst_rt_at.copy(),
        max_jacobian_error=worst_jac,
        worst_jacobian_at=worst_jac_at.copy(),
        min_jacobian_sigma=float(min_sigma),
        min_sigma_at=min_sigma_at.copy(),
    )


def transformed_problem(problem, charts):
    """Pull the problem through a chart pair: new residual F(phi^-1, psi^-1).

    Jacobians follow the chain rule (right-multiplication by the inverse chart
    Jacobians); the seed maps through (phi, psi) and the transformed domains
    are all of Euclidean space.
    """
    if not charts.matches(problem):
        raise ChartDomainMismatch(
            f"chart dims ({charts.phi.dim}, {charts.psi.dim}) do not match "
            f"problem dims ({problem.m}, {problem.n})")
    phi, psi = charts.phi, charts.psi
    a, b = problem.seed
    if not phi.contains(a) or not psi.contains(b):
        raise ChartDomainMismatch("problem seed lies outside the chart domains")

    def residual(xt, yt):
        return problem.residual(phi.inverse_point(xt), psi.inverse_point(yt))

    def jac_x(xt, yt):
        x = phi.inverse_point(xt)
        y = psi.inverse_point(yt)
        dphi_inv = _invert_jacobian(phi.jac(x), "phi")
        return problem.jac_x(x, y) @ dphi_inv

    def jac_y(xt, yt):
        x = phi.inverse_point(xt)
        y = psi.inverse_point(yt)
        dpsi_inv = _invert_jacobian(psi.jac(y), "psi")
        return problem.jac_y(x, y) @ dpsi_inv

    name = f"{problem.name}~charts" if problem.name else None
    return ImplicitProblem(
        problem.m, problem.n, problem.l, residual,
        phi.forward_point(a), psi.forward_point(b),
        jac_x_fn=jac_x, jac_y_fn=jac_y,
        domain_x=Box.unbounded(problem.m), domain_y=Box.unbounded(problem.n),
        name=name)


def _invert_jacobian(jac, label):
    try:
        return linalg.left_inverse(jac)
    except RankDeficient as exc:
        raise RankDeficient(exc.sigma_min,
                            f"chart {label} has a singular Jacobian") from exc
