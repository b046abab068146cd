"""Gauss-Newton corrector: pin y back onto the zero set at fixed x.

The update applies the Moore-Penrose left inverse of the y-Jacobian to the
residual, with a halving line search on the residual norm for robustness far
from the solution. Iterates never cross the open y-domain: a step landing
outside gets one halving attempt, then the correction fails.
"""

from __future__ import annotations

import dataclasses

import numpy as np

from . import linalg
from .errors import (BoundaryEscape, DomainViolation, NoConvergence,
                     RankDeficient, RankLoss)

DEFAULT_TOL = 1e-10
DEFAULT_MAX_ITER = 25
MIN_STEP_FACTOR = 2.0 ** -10


@dataclasses.dataclass
class CorrectorOptions:
    tol: float = DEFAULT_TOL
    max_iter: int = DEFAULT_MAX_ITER
    min_step_factor: float = MIN_STEP_FACTOR

    def __post_init__(self):
        if self.tol <= 0.0:
            raise ValueError("tol must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")


@dataclasses.dataclass
class CorrectorResult:
    y: np.ndarray
    residual_norms: list
    iterations: int

    @property
    def final_residual(self):
        return self.residual_norms[-1]


def correct_full(problem, x, y0, options=None):
    """Run the corrector and return the full iteration record.

    Raises NoConvergence, RankLoss, or BoundaryEscape on failure.
    """
    opts = options or CorrectorOptions()
    x = np.asarray(x, dtype=np.float64).reshape(-1)
    y = np.asarray(y0, dtype=np.float64).reshape(-1)
    if not problem.contains_x(x):
        raise DomainViolation(f"x={x} outside the open x-domain")
    if not problem.contains_y(y):
        raise DomainViolation(f"y0={y} outside the open y-domain")

    r = problem.residual(x, y)
    norms = [float(np.linalg.norm(r))]
    iterations = 0
    for _ in range(opts.max_iter):
        if norms[-1] <= opts.tol:
            break
        jac = problem.jac_y(x, y)
        try:
            dy = -linalg.least_squares_step(jac, r)
        except RankDeficient as exc:
            raise RankLoss(
                f"sigma_min={exc.sigma_min:.3e} at iterate {iterations}") from exc

        alpha = 1.0
        cand = y + dy
        if not problem.contains_y(cand):
            alpha = 0.5
            cand = y + alpha * dy
            if not problem.contains_y(cand):
                raise BoundaryEscape(
                    f"corrector step leaves the y-domain near y={y}")
        r_cand = problem.residual(x, cand)
        cand_norm = float(np.linalg.norm(r_cand))
        while cand_norm >= norms[-1] and alpha > opts.min_step_factor:
            alpha *= 0.5
            cand = y + alpha * dy
            if not problem.contains_y(cand):
                raise BoundaryEscape(
                    f"corrector step leaves the y-domain near y={y}")
            r_cand = problem.residual(x, cand)
            cand_norm = float(np.linalg.norm(r_cand))

        y = cand
        r = r_cand
        norms.append(cand_norm)
        iterations += 1

    if norms[-1] > opts.tol:
        raise NoConvergence(norms)
    return CorrectorResult(y=y, residual_norms=norms, iterations=iterations)


def newton_correct(problem, x, y0, options=None):
    """Corrected y with residual norm below the tolerance."""
    return correct_full(problem, x, y0, options).y
