"""Weight functions and their admissibility audit.

A weight bounds the admissible growth in the certified inequality: it must be
positive, nondecreasing, and have a divergent integral of its reciprocal.
Divergence of an improper integral is undecidable from finitely many samples,
so for unrecognized kinds the verdict is an explicitly flagged heuristic;
constant and affine weights get an analytic verdict.
"""

from __future__ import annotations

import dataclasses

import numpy as np

from .errors import ConfigError, NonPositiveValue

DEFAULT_GRID_MAX = 1000.0
DEFAULT_SAMPLES = 1024
MONOTONE_SLACK = 1e-12

_trapezoid = getattr(np, "trapezoid", None) or np.trapz  # numpy < 2 compatibility


class Weight:
    """Candidate weight function on [0, inf)."""

    def __init__(self, evaluator, kind="user", params=None, name=None):
        self.evaluator = evaluator
        self.kind = kind
        self.params = dict(params) if params else {}
        self.name = name or kind

    @classmethod
    def constant(cls, c):
        c = float(c)
        return cls(lambda t: c, kind="constant", params={"c": c},
                   name=f"constant:{c:g}")

    @classmethod
    def affine(cls, a, b):
        a = float(a)
        b = float(b)
        return cls(lambda t: a * t + b, kind="affine", params={"a": a, "b": b},
                   name=f"affine:{a:g},{b:g}")

    @classmethod
    def from_table(cls, ts, values):
        ts = np.asarray(ts, dtype=np.float64).reshape(-1)
        values = np.asarray(values, dtype=np.float64).reshape(-1)
        if ts.shape != values.shape or ts.shape[0] < 2:
            raise ConfigError("weight table needs two equal-length columns, >= 2 rows")
        if np.any(np.diff(ts) <= 0):
            raise ConfigError("weight table abscissae must be strictly increasing")
        return cls(lambda t: float(np.interp(t, ts, values)), kind="table",
                   params={"rows": int(ts.shape[0])}, name="table")

    @classmethod
    def from_function(cls, fn, name="user"):
        return cls(fn, kind="user", name=name)

    def __call__(self, t):
        """Evaluate at t >= 0; a non-positive result raises NonPositiveValue."""
        t = float(t)
        if t < 0.0:
            raise ValueError(f"weights are defined on [0, inf), got t={t}")
        value = float(self.evaluator(t))
        if value <= 0.0:
            raise NonPositiveValue(f"weight {self.name} returned {value:.3e} at t={t:.6g}")
        return value

    def __repr__(self):
        return f"Weight({self.name})"


@dataclasses.dataclass
class AdmissibilityReport:
    """Three verdicts: positivity, monotonicity, divergent reciprocal integral."""

    weight_name: str
    grid_max: float
    samples: int
    positivity: bool
    min_value: float
    monotonicity: bool
    worst_decrease: float
    divergence: bool
    divergence_heuristic: bool
    integral_estimate: float
    divergence_threshold: float

    @property
    def admissible(self):
        return self.positivity and self.monotonicity and self.divergence

    def to_dict(self):
        return dataclasses.asdict(self)


def _grid(grid_max, samples):
    # geometric spacing resolves both small-t and tail behavior
    return np.concatenate([[0.0], np.geomspace(grid_max * 1e-6, grid_max, samples - 1)])


def check_weight(weight, grid_max=DEFAULT_GRID_MAX, samples=DEFAULT_SAMPLES):
    """Audit a weight on [0, grid_max]; never raises, failures go in the report."""
    if grid_max <= 0.0 or samples < 2:
        raise ValueError("need grid_max > 0 and samples >= 2")
    ts = _grid(grid_max, samples)
    with np.errstate(over="ignore", invalid="ignore"):
        values = np.array([float(weight.evaluator(t)) for t in ts])

    # overflow to +inf is a legitimate (large) weight value; only NaN is invalid
    min_value = float(values.min())
    positivity = bool(min_value > 0.0) and not bool(np.isnan(values).any())

    with np.errstate(invalid="ignore"):
        diffs = np.diff(values)
    diffs = np.where(np.isnan(diffs), 0.0, diffs)  # inf -> inf plateaus are flat
    worst_decrease = float(max(0.0, -diffs.min())) if diffs.size else 0.0
    monotonicity = bool(worst_decrease <= MONOTONE_SLACK)

    if weight.kind in ("constant", "affine"):
        # 1/(a t + b) integrates to a log or a linear ramp: divergent while positive
        divergence = positivity
        heuristic = False
        integral = float("inf") if positivity else 0.0
        threshold = 0.0
    else:
        heuristic = True
        if not positivity:
            divergence = False
            integral = 0.0
            threshold = float("inf")
        else:
            omega_one = float(weight.evaluator(1.0))
            with np.errstate(divide="ignore"):
                reciprocal = np.where(np.isinf(values), 0.0, 1.0 / values)
            integral = float(_trapezoid(reciprocal, ts))
            threshold = 0.5 * np.log1p(grid_max) / omega_one
            half_mask = ts <= grid_max / 2.0
            integral_half = float(_trapezoid(reciprocal[half_mask], ts[half_mask]))
            threshold_half = 0.5 * np.log1p(grid_max / 2.0) / omega_one
            divergence = bool(integral >= threshold and integral_half >= threshold_half)

    return AdmissibilityReport(
        weight_name=weight.name,
        grid_max=float(grid_max),
        samples=int(samples),
        positivity=positivity,
        min_value=min_value,
        monotonicity=monotonicity,
        worst_decrease=worst_decrease,
        divergence=divergence,
        divergence_heuristic=heuristic,
        integral_estimate=integral,
        divergence_threshold=threshold,
    )
