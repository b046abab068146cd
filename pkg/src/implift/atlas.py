"""Lazily materialized global implicit function over the traced component.

The atlas caches on-zero-set samples keyed by x and answers point queries by
lifting planned paths from the nearest cached point. Loop probes
(monodromy) and multi-path consistency checks expose multiple sheets, i.e.
situations where no single-valued global function exists.

Concurrency: the cache is mutable; concurrent evaluates need external mutual
exclusion or a single-writer discipline.
"""

from __future__ import annotations

import dataclasses
import logging

import numpy as np

from . import linalg
from .errors import DimensionMismatch, DomainViolation, ImpliftError, Unreachable
from .problem import Box, validate_seed
from .tracer import (ChartLinePath, SegmentPath, TracerOptions, lift_path)

logger = logging.getLogger(__name__)

SNAP_FACTOR = 1e-6
GAP_FACTOR = 100.0  # loop-closure threshold, in units of trace_tol


@dataclasses.dataclass
class MonodromyResult:
    closed: bool
    gap: float
    gap_vector: np.ndarray
    threshold: float
    trace: object

    def to_dict(self):
        return {
            "closed": self.closed,
            "gap": self.gap,
            "gap_vector": list(self.gap_vector),
            "threshold": self.threshold,
        }


@dataclasses.dataclass
class PathIndependenceResult:
    passed: bool
    max_gap: float
    endpoints: list
    threshold: float
    traces: list

    def to_dict(self):
        return {
            "passed": self.passed,
            "max_gap": self.max_gap,
            "endpoints": [list(e) for e in self.endpoints],
            "threshold": self.threshold,
        }


class SolutionAtlas:
    """Point queries, loop probes and derivative evaluation for y = g(x)."""

    def __init__(self, problem, options=None, charts=None, validate=True):
        self.problem = problem
        self.options = options or TracerOptions()
        self.charts = charts
        if validate:
            validate_seed(problem)
        self.snap_radius = SNAP_FACTOR * self._domain_scale()
        a, b = problem.seed
        self._cache = [(a, b)]

    def _domain_scale(self):
        # smallest finite width, capped at 1: the snap radius must stay well
        # below any x-resolution callers might probe (finite differences etc.)
        if isinstance(self.problem.domain_x, Box):
            widths = self.problem.domain_x.upper - self.problem.domain_x.lower
            finite = widths[np.isfinite(widths)]
            if finite.size:
                return min(1.0, float(finite.min()))
        return 1.0

    # -- cache -------------------------------------------------------------

    @property
    def cache_size(self):
        return len(self._cache)

    def cached_points(self):
        return [(x.copy(), y.copy()) for x, y in self._cache]

    def _lookup(self, x):
        for cx, cy in self._cache:
            if float(np.linalg.norm(cx - x)) <= self.snap_radius:
                return cy
        return None

    def _nearest(self, x):
        if self.charts is not None:
            xt = self.charts.phi.forward_point(x)
            dists = [float(np.linalg.norm(self.charts.phi.forward_point(cx) - xt))
                     for cx, _ in self._cache]
        else:
            dists = [float(np.linalg.norm(cx - x)) for cx, _ in self._cache]
        idx = int(np.argmin(dists))
        return self._cache[idx]

    def _absorb(self, trace):
        for sample in trace.samples:
            if self._lookup(sample.x) is None:
                self._cache.append((sample.x.copy(), sample.y.copy()))

    # -- planning and evaluation --------------------------------------------

    def _plan(self, x_from, x_to):
        if self.charts is not None:
            phi = self.charts.phi
            return ChartLinePath(phi.forward_point(x_from), phi.forward_point(x_to), phi)
        seg = SegmentPath(x_from, x_to)
        if not isinstance(self.problem.domain_x, Box):
            # predicate domains are not convex in general: sample the segment
            for t in np.linspace(0.0, 1.0, 65):
                if not self.problem.contains_x(seg.position(t)):
                    raise Unreachable("plan_outside_domain",
                                      message="straight plan leaves the x-domain; "
                                              "supply charts or an explicit path")
        return seg

    def evaluate(self, x_target):
        """y with F(x_target, y) = 0, lifting a planned path from the cache.

        Raises Unreachable (carrying the failed trace) when no lift reaches
        the target; repeated queries for the same target hit the cache and
        return identical values.
        """
        x = np.asarray(x_target, dtype=np.float64).reshape(-1)
        if x.shape[0] != self.problem.m:
            raise DimensionMismatch(f"target dim {x.shape[0]} != m {self.problem.m}")
        if not self.problem.contains_x(x):
            raise DomainViolation(f"target {x} outside the open x-domain")
        hit = self._lookup(x)
        if hit is not None:
            return hit.copy()
        x_near, y_near = self._nearest(x)
        path = self._plan(x_near, x)
        trace = lift_path(self.problem, path, y_near, self.options)
        self._absorb(trace)
        if not trace.completed:
            raise Unreachable(trace.status.kind, trace)
        return trace.final.y.copy()

    def derivative(self, x_target):
        """Derivative of the implicit function: -S(x, y) DxF(x, y)."""
        x = np.asarray(x_target, dtype=np.float64).reshape(-1)
        y = self.evaluate(x)
        s = linalg.left_inverse(self.problem.jac_y(x, y))
        return -s @ self.problem.jac_x(x, y)

    # -- probes --------------------------------------------------------------

    def monodromy_check(self, loop):
        """Lift a closed x-loop; Closed iff the y-endpoints coincide."""
        start = loop.position(0.0)
        end = loop.position(1.0)
        if float(np.linalg.norm(end - start)) > self.snap_radius:
            raise ValueError("monodromy loop must be closed in x")
        y0 = self.evaluate(start)
        trace = lift_path(self.problem, loop, y0, self.options)
        self._absorb(trace)
        if not trace.completed:
            raise Unreachable(trace.status.kind, trace)
        gap_vector = trace.final.y - y0
        gap = float(np.linalg.norm(gap_vector))
        threshold = GAP_FACTOR * self.options.trace_tol
        return MonodromyResult(closed=bool(gap <= threshold), gap=gap,
                               gap_vector=gap_vector, threshold=threshold,
                               trace=trace)

    def path_independence_check(self, x_target, paths):
        """Lift several paths into the same target; endpoints must coincide."""
        paths = list(paths)
        if len(paths) < 2:
            raise ValueError("need at least two paths")
        x = np.asarray(x_target, dtype=np.float64).reshape(-1)
        endpoints = []
        traces = []
        for path in paths:
            if float(np.linalg.norm(path.position(1.0) - x)) > self.snap_radius:
                raise ValueError("every path must end at the target")
            y0 = self.evaluate(path.position(0.0))
            trace = lift_path(self.problem, path, y0, self.options)
            self._absorb(trace)
            if not trace.completed:
                raise Unreachable(trace.status.kind, trace)
            endpoints.append(trace.final.y.copy())
            traces.append(trace)
        max_gap = 0.0
        for i in range(len(endpoints)):
            for j in range(i + 1, len(endpoints)):
                max_gap = max(max_gap, float(np.linalg.norm(endpoints[i] - endpoints[j])))
        threshold = GAP_FACTOR * self.options.trace_tol
        return PathIndependenceResult(passed=bool(max_gap <= threshold),
                                      max_gap=max_gap, endpoints=endpoints,
                                      threshold=threshold, traces=traces)

    # -- persistence -----------------------------------------------------------

    def export_payload(self):
        """JSON-ready session snapshot (named problems only)."""
        if not self.problem.name:
            raise ImpliftError("only named problems can be exported")
        return {
            "problem": {"name": self.problem.name,
                        "parameters": dict(self.problem.parameters)},
            "snap_radius": self.snap_radius,
            "samples": [{"x": list(x), "y": list(y)} for x, y in self._cache],
        }

    @classmethod
    def from_payload(cls, payload, options=None, charts=None):
        from . import examples  # deferred: examples builds on this module's siblings
        spec = payload["problem"]
        descriptor = examples.get(spec["name"], **spec.get("parameters", {}))
        atlas = cls(descriptor.problem, options=options, charts=charts)
        for entry in payload["samples"]:
            x = np.asarray(entry["x"], dtype=np.float64)
            y = np.asarray(entry["y"], dtype=np.float64)
            if atlas._lookup(x) is None:
                atlas._cache.append((x, y))
        return atlas

    def export_json(self, stream):
        from ._serialize import dumps
        stream.write(dumps(self.export_payload()) + "\n")

    @classmethod
    def from_json(cls, stream, options=None, charts=None):
        import json
        return cls.from_payload(json.load(stream), options=options, charts=charts)
