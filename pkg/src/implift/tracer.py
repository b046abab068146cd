"""Path lifting: predictor-corrector continuation along the zero set.

Paths in x-space are piecewise-C1 (polylines, arcs, chart-space lines); the
lift integrates the induced ODE ydot = -S(x, y) DxF(x, y) xdot as predictor
and corrects back onto the zero set at every accepted parameter. A failed
lift is final: failure statuses are the numerical reading of the continuation
property breaking down, not a condition to be stepped over.
"""

from __future__ import annotations

import dataclasses
import logging

import numpy as np

from . import linalg
from .certify import growth_lhs_rhs
from .corrector import CorrectorOptions, correct_full
from .errors import (BoundaryEscape, DimensionMismatch, DomainViolation,
                     NoConvergence, PredictorBlowup, RankDeficient, RankLoss)
from .problem import finite_difference_jacobian

logger = logging.getLogger(__name__)

DEFAULT_TRACE_TOL = 1e-8


# ---------------------------------------------------------------------------
# Path specifications: t in [0, 1], piecewise-C1, constant speed per segment.

class BasePath:
    """Common surface: position(t), velocity(t), breakpoints, reversal."""

    dim = None

    def position(self, t):
        raise NotImplementedError

    def velocity(self, t):
        raise NotImplementedError

    def breakpoints(self):
        """Sorted parameters (including 0 and 1) where C1 smoothness may break."""
        return [0.0, 1.0]

    def reversed(self):
        raise NotImplementedError

    def is_closed(self, tol=1e-9):
        return bool(np.linalg.norm(self.position(1.0) - self.position(0.0)) <= tol)


class SegmentPath(BasePath):
    """Straight segment from start to end."""

    def __init__(self, start, end):
        self.start = np.atleast_1d(np.asarray(start, dtype=np.float64))
        self.end = np.atleast_1d(np.asarray(end, dtype=np.float64))
        if self.start.shape != self.end.shape:
            raise DimensionMismatch("segment endpoints must have equal dimension")
        self.dim = self.start.shape[0]

    def position(self, t):
        return self.start + t * (self.end - self.start)

    def velocity(self, t):
        return self.end - self.start

    def reversed(self):
        return SegmentPath(self.end, self.start)


class PolylinePath(BasePath):
    """Piecewise-linear path; parameter allocated proportional to arc length."""

    def __init__(self, vertices):
        pts = [np.atleast_1d(np.asarray(v, dtype=np.float64)) for v in vertices]
        if len(pts) < 2:
            raise ValueError("polyline needs at least two vertices")
        self.vertices = np.vstack(pts)
        self.dim = self.vertices.shape[1]
        lengths = np.linalg.norm(np.diff(self.vertices, axis=0), axis=1)
        if np.any(lengths == 0.0):
            raise ValueError("consecutive polyline vertices must be distinct")
        cumulative = np.concatenate([[0.0], np.cumsum(lengths)])
        self._fractions = cumulative / cumulative[-1]

    def _segment(self, t):
        t = min(max(t, 0.0), 1.0)
        idx = int(np.searchsorted(self._fractions, t, side="right") - 1)
        idx = min(idx, len(self._fractions) - 2)
        t0 = self._fractions[idx]
        t1 = self._fractions[idx + 1]
        return idx, (t - t0) / (t1 - t0), t1 - t0

    def position(self, t):
        idx, local, _ = self._segment(t)
        a = self.vertices[idx]
        b = self.vertices[idx + 1]
        return a + local * (b - a)

    def velocity(self, t):
        idx, _, width = self._segment(t)
        return (self.vertices[idx + 1] - self.vertices[idx]) / width

    def breakpoints(self):
        return [float(f) for f in self._fractions]

    def reversed(self):
        return PolylinePath(self.vertices[::-1])


class CirclePath(BasePath):
    """Circular arc in the (i, j) coordinate plane.

    x_i = center_i + r cos(angle), x_j = center_j + r sin(angle) with
    angle = start_angle + 2 pi turns t; other coordinates stay at the center
    values. Negative turns traverse clockwise; fractional turns give arcs.
    """

    def __init__(self, center, radius, turns=1.0, start_angle=0.0, axes=(0, 1)):
        self.center = np.atleast_1d(np.asarray(center, dtype=np.float64))
        self.dim = self.center.shape[0]
        self.radius = float(radius)
        self.turns = float(turns)
        self.start_angle = float(start_angle)
        self.axes = (int(axes[0]), int(axes[1]))
        if self.radius <= 0.0:
            raise ValueError("circle radius must be positive")
        if self.turns == 0.0:
            raise ValueError("circle needs a nonzero number of turns")
        i, j = self.axes
        if not (0 <= i < self.dim and 0 <= j < self.dim and i != j):
            raise DimensionMismatch(f"invalid circle axes {self.axes} for dim {self.dim}")

    def _angle(self, t):
        return self.start_angle + 2.0 * np.pi * self.turns * t

    def position(self, t):
        x = self.center.copy()
        i, j = self.axes
        angle = self._angle(t)
        x[i] += self.radius * np.cos(angle)
        x[j] += self.radius * np.sin(angle)
        return x

    def velocity(self, t):
        v = np.zeros(self.dim)
        i, j = self.axes
        angle = self._angle(t)
        rate = 2.0 * np.pi * self.turns * self.radius
        v[i] = -rate * np.sin(angle)
        v[j] = rate * np.cos(angle)
        return v

    def reversed(self):
        return CirclePath(self.center, self.radius, turns=-self.turns,
                          start_angle=self._angle(1.0), axes=self.axes)

    def is_closed(self, tol=1e-9):
        return abs(self.turns - round(self.turns)) < 1e-12


class ChartLinePath(BasePath):
    """Straight segment in chart coordinates, mapped back through the chart."""

    def __init__(self, start_tilde, end_tilde, chart):
        self.start_tilde = np.atleast_1d(np.asarray(start_tilde, dtype=np.float64))
        self.end_tilde = np.atleast_1d(np.asarray(end_tilde, dtype=np.float64))
        if self.start_tilde.shape != self.end_tilde.shape:
            raise DimensionMismatch("chart-line endpoints must have equal dimension")
        self.chart = chart
        self.dim = chart.dim

    def position(self, t):
        q = self.start_tilde + t * (self.end_tilde - self.start_tilde)
        return self.chart.inverse_point(q)

    def velocity(self, t):
        x = self.position(t)
        return linalg.solve_square(self.chart.jac(x),
                                   self.end_tilde - self.start_tilde)

    def reversed(self):
        return ChartLinePath(self.end_tilde, self.start_tilde, self.chart)


class CallablePath(BasePath):
    """Programmatic path from a position callable (velocity optional)."""

    def __init__(self, fn, dim, velocity_fn=None, breakpoints=None):
        self.fn = fn
        self.dim = int(dim)
        self.velocity_fn = velocity_fn
        self._breakpoints = sorted(set([0.0, 1.0] + list(breakpoints or [])))

    def position(self, t):
        return np.atleast_1d(np.asarray(self.fn(t), dtype=np.float64))

    def velocity(self, t):
        if self.velocity_fn is not None:
            return np.atleast_1d(np.asarray(self.velocity_fn(t), dtype=np.float64))
        jac = finite_difference_jacobian(
            lambda s: self.fn(float(s[0])), np.array([t]),
            None if 0.0 < t < 1.0 else _UnitInterval(), self.dim)
        return jac[:, 0]

    def breakpoints(self):
        return list(self._breakpoints)

    def reversed(self):
        rev_breaks = [1.0 - b for b in self._breakpoints]
        vel = None
        if self.velocity_fn is not None:
            vel = lambda t: -np.asarray(self.velocity_fn(1.0 - t))
        return CallablePath(lambda t: self.fn(1.0 - t), self.dim,
                            velocity_fn=vel, breakpoints=rev_breaks)


class _UnitInterval:
    def __call__(self, z):
        return bool(0.0 <= z[0] <= 1.0)


# ---------------------------------------------------------------------------
# Traces.

@dataclasses.dataclass
class TraceSample:
    t: float
    x: np.ndarray
    y: np.ndarray
    residual_norm: float
    step_size: float
    cert_lhs: float = None
    cert_rhs: float = None


@dataclasses.dataclass(frozen=True)
class TraceStatus:
    kind: str  # completed | boundary_escape | rank_loss | corrector_divergence | step_underflow
    t: float = None

    KINDS = ("completed", "boundary_escape", "rank_loss",
             "corrector_divergence", "step_underflow")

    @property
    def completed(self):
        return self.kind == "completed"

    def to_dict(self):
        return {"kind": self.kind, "t": self.t}


@dataclasses.dataclass
class Trace:
    """Sampled lifted path; immutable once returned by the tracer."""

    problem: object
    path: BasePath
    samples: list
    status: TraceStatus

    @property
    def completed(self):
        return self.status.completed

    @property
    def final(self):
        return self.samples[-1]

    @property
    def ts(self):
        return np.array([s.t for s in self.samples])

    @property
    def xs(self):
        return np.vstack([s.x for s in self.samples]) if self.samples else np.empty((0, 0))

    @property
    def ys(self):
        return np.vstack([s.y for s in self.samples]) if self.samples else np.empty((0, 0))

    def csv_header(self):
        m = self.problem.m
        n = self.problem.n
        cols = (["t"] + [f"x_{i + 1}" for i in range(m)]
                + [f"y_{i + 1}" for i in range(n)]
                + ["residual", "step", "cert_lhs", "cert_rhs"])
        return cols

    def write_csv(self, stream):
        from ._serialize import format_float as ff
        stream.write(",".join(self.csv_header()) + "\n")
        for s in self.samples:
            row = ([ff(s.t)] + [ff(v) for v in s.x] + [ff(v) for v in s.y]
                   + [ff(s.residual_norm), ff(s.step_size)]
                   + ["" if s.cert_lhs is None else ff(s.cert_lhs)]
                   + ["" if s.cert_rhs is None else ff(s.cert_rhs)])
            stream.write(",".join(row) + "\n")

    def to_json_payload(self):
        rows = []
        for s in self.samples:
            rows.append({
                "t": s.t,
                "x": list(s.x),
                "y": list(s.y),
                "residual": s.residual_norm,
                "step": s.step_size,
                "cert_lhs": s.cert_lhs,
                "cert_rhs": s.cert_rhs,
            })
        return {"status": self.status.to_dict(), "samples": rows}

    def write_json(self, stream):
        from ._serialize import dumps
        stream.write(dumps(self.to_json_payload()) + "\n")


def read_trace_csv(stream):
    """Read a trace CSV back into a dict of float arrays keyed by column."""
    header = stream.readline().strip().split(",")
    columns = {name: [] for name in header}
    for line in stream:
        line = line.strip()
        if not line:
            continue
        for name, cell in zip(header, line.split(",")):
            columns[name].append(float(cell) if cell else np.nan)
    return {name: np.array(vals) for name, vals in columns.items()}


# ---------------------------------------------------------------------------
# Tracer options and the lift itself.

@dataclasses.dataclass
class TracerOptions:
    trace_tol: float = DEFAULT_TRACE_TOL
    h_init: float = 1e-2
    h_min: float = 1e-8
    h_max: float = 0.1
    predictor: str = "rk4"  # or "euler"
    cert_charts: object = None
    cert_weight: object = None
    corrector: CorrectorOptions = None

    def __post_init__(self):
        if not (0.0 < self.h_min <= self.h_init <= self.h_max <= 1.0):
            raise ValueError("need 0 < h_min <= h_init <= h_max <= 1")
        if self.predictor not in ("rk4", "euler"):
            raise ValueError(f"unknown predictor {self.predictor!r}")

    def corrector_options(self):
        if self.corrector is not None:
            return self.corrector
        return CorrectorOptions(tol=max(1e-14, 0.01 * self.trace_tol))


class _StepFailure(Exception):
    """Internal: one predictor-corrector attempt failed; carries the reason."""

    def __init__(self, reason):
        self.reason = reason
        super().__init__(str(reason))


_STATUS_FOR = {
    NoConvergence: "corrector_divergence",
    RankLoss: "rank_loss",
    BoundaryEscape: "boundary_escape",
    PredictorBlowup: "step_underflow",
}


def _status_kind(exc):
    for etype, kind in _STATUS_FOR.items():
        if isinstance(exc, etype):
            return kind
    return "corrector_divergence"


def _davidenko_field(problem, path, t, y):
    """Right-hand side of the lifted-path ODE at parameter t."""
    x = path.position(t)
    if not problem.contains_y(y):
        raise BoundaryEscape(f"predictor stage left the y-domain at t={t:.6g}")
    rhs = problem.jac_x(x, y) @ path.velocity(t)
    try:
        return -linalg.least_squares_step(problem.jac_y(x, y), rhs)
    except RankDeficient as exc:
        raise RankLoss(f"sigma_min={exc.sigma_min:.3e} at t={t:.6g}") from exc


def _predict(problem, path, t0, y0, t1, predictor):
    h = t1 - t0
    if predictor == "euler":
        y_pred = y0 + h * _davidenko_field(problem, path, t0, y0)
    else:
        k1 = _davidenko_field(problem, path, t0, y0)
        k2 = _davidenko_field(problem, path, t0 + h / 2.0, y0 + (h / 2.0) * k1)
        k3 = _davidenko_field(problem, path, t0 + h / 2.0, y0 + (h / 2.0) * k2)
        k4 = _davidenko_field(problem, path, t1, y0 + h * k3)
        y_pred = y0 + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    trust = max(1.0, float(np.linalg.norm(y0)))
    if not np.isfinite(y_pred).all() or float(np.linalg.norm(y_pred - y0)) > 10.0 * trust:
        raise PredictorBlowup(f"predicted step too large at t={t0:.6g}")
    if not problem.contains_y(y_pred):
        # give the corrector an in-domain starting point
        y_pred = y0
    return y_pred


def _advance(problem, path, t0, y0, t1, opts, corrector_opts):
    """One predictor-corrector step; returns (y_next, corrector_iterations)."""
    y_pred = _predict(problem, path, t0, y0, t1, opts.predictor)
    x1 = path.position(t1)
    if not problem.contains_x(x1):
        raise DomainViolation(f"path point at t={t1:.6g} outside the x-domain")
    result = correct_full(problem, x1, y_pred, corrector_opts)
    return result.y, result.iterations


def _cert_values(problem, x, y, opts):
    if opts.cert_charts is None or opts.cert_weight is None:
        return None, None
    lhs, rhs = growth_lhs_rhs(problem, x, y, opts.cert_charts, opts.cert_weight)
    return float(lhs), float(rhs)


def step(problem, x_from, y_from, x_to, options=None):
    """Single predictor-corrector step along the straight segment x_from -> x_to."""
    opts = options or TracerOptions()
    seg = SegmentPath(x_from, x_to)
    y_next, _ = _advance(problem, seg, 0.0, np.asarray(y_from, dtype=np.float64).reshape(-1),
                         1.0, opts, opts.corrector_options())
    if float(np.linalg.norm(problem.residual(seg.end, y_next))) > opts.trace_tol:
        raise NoConvergence([float(np.linalg.norm(problem.residual(seg.end, y_next)))])
    return y_next


def lift_path(problem, path, y_start, options=None):
    """Lift a path in x-space to the zero set, starting from y_start.

    Numerical failure never raises: it ends the returned trace with a status
    naming the failure mode and the parameter reached. Hard errors are
    reserved for malformed inputs (dimension mismatches, paths that leave the
    open x-domain).
    """
    opts = options or TracerOptions()
    if path.dim != problem.m:
        raise DimensionMismatch(f"path dim {path.dim} != problem m {problem.m}")
    y = np.asarray(y_start, dtype=np.float64).reshape(-1)
    if y.shape[0] != problem.n:
        raise DimensionMismatch(f"y_start dim {y.shape[0]} != problem n {problem.n}")
    corrector_opts = opts.corrector_options()

    x0 = path.position(0.0)
    if not problem.contains_x(x0):
        raise DomainViolation("path start lies outside the open x-domain")
    try:
        initial = correct_full(problem, x0, y, corrector_opts)
    except (NoConvergence, RankLoss, BoundaryEscape) as exc:
        logger.debug("initial correction failed: %s", exc)
        return Trace(problem, path, [],
                     TraceStatus(kind=_status_kind(exc), t=0.0))
    y = initial.y
    lhs, rhs = _cert_values(problem, x0, y, opts)
    samples = [TraceSample(0.0, x0, y.copy(),
                           float(np.linalg.norm(problem.residual(x0, y))),
                           0.0, lhs, rhs)]

    breaks = [b for b in path.breakpoints() if b > 1e-15]
    if not breaks or abs(breaks[-1] - 1.0) > 1e-12:
        breaks.append(1.0)
    t = 0.0
    h = opts.h_init
    easy_streak = 0
    next_break_idx = 0
    while t < 1.0 - 1e-14:
        while breaks[next_break_idx] <= t + 1e-14:
            next_break_idx += 1
        cap = breaks[next_break_idx]
        h_eff = min(h, cap - t)
        t_next = cap if cap - (t + h_eff) < 0.5 * opts.h_min else t + h_eff
        try:
            y_next, its = _advance(problem, path, t, y, t_next, opts, corrector_opts)
        except (NoConvergence, RankLoss, BoundaryEscape, PredictorBlowup) as exc:
            if h_eff <= opts.h_min * (1.0 + 1e-9):
                logger.debug("lift failed at t=%.6g: %s", t, exc)
                return Trace(problem, path, samples,
                             TraceStatus(kind=_status_kind(exc), t=t))
            h = max(h / 2.0, opts.h_min)
            easy_streak = 0
            continue
        t = t_next
        y = y_next
        x = path.position(t)
        lhs, rhs = _cert_values(problem, x, y, opts)
        samples.append(TraceSample(float(t), x, y.copy(),
                                   float(np.linalg.norm(problem.residual(x, y))),
                                   float(h_eff), lhs, rhs))
        # standard continuation heuristic: grow after easy successes
        easy_streak = easy_streak + 1 if its <= 2 else 0
        if easy_streak >= 3:
            h = min(h * 1.5, opts.h_max)
            easy_streak = 0
    return Trace(problem, path, samples, TraceStatus(kind="completed"))
