"""Sampled audits of the solvability hypotheses along traces.

Every check evaluates on trace samples (optionally refined with corrected
midpoints) and reports a worst-case margin with its location. Certificates
are sampled evidence, never proofs: the underlying conditions quantify over
an infinite set.
"""

from __future__ import annotations

import dataclasses

import numpy as np

from . import linalg
from .corrector import CorrectorOptions, correct_full
from .errors import ChartDomainMismatch, DimensionMismatch, ImpliftError

MARGIN_SLACK = 1e-9  # pass iff worst margin >= -MARGIN_SLACK


@dataclasses.dataclass
class CertificateReport:
    """Single-check verdict with the worst margin and where it occurred."""

    name: str
    verdict: str  # "pass" | "fail" | "heuristic-pass"
    worst_margin: float
    worst_location: tuple  # (x, y)
    samples_checked: int
    details: dict = dataclasses.field(default_factory=dict)

    @property
    def passed(self):
        return self.verdict in ("pass", "heuristic-pass")

    def to_dict(self):
        x, y = self.worst_location
        payload = {
            "name": self.name,
            "verdict": self.verdict,
            "worst_margin": self.worst_margin,
            "worst_x": list(np.asarray(x, dtype=float)),
            "worst_y": list(np.asarray(y, dtype=float)),
            "samples_checked": self.samples_checked,
        }
        payload.update(self.details)
        return payload


@dataclasses.dataclass
class ChartTransferReport:
    """Transfer factor between two chart pairs; makes no admissibility claim."""

    max_factor: float
    location: tuple
    samples_checked: int

    def to_dict(self):
        x, y = self.location
        return {
            "name": "chart-independence-probe",
            "max_factor": self.max_factor,
            "worst_x": list(np.asarray(x, dtype=float)),
            "worst_y": list(np.asarray(y, dtype=float)),
            "samples_checked": self.samples_checked,
        }


def growth_lhs_rhs(problem, x, y, charts, weight):
    """Both sides of the growth bound at one zero-set point.

    LHS = ||Dpsi(y) S(x, y)|| * ||DxF(x, y) (Dphi(x))^-1||, RHS = weight(|psi(y)|).
    """
    phi, psi = charts.phi, charts.psi
    if not phi.contains(x) or not psi.contains(y):
        raise ChartDomainMismatch(
            f"sample (x={x}, y={y}) outside the chart domains")
    s = linalg.left_inverse(problem.jac_y(x, y))
    dpsi = psi.jac(y)
    dphi_inv = linalg.left_inverse(phi.jac(x))
    lhs = (linalg.spectral_norm(dpsi @ s)
           * linalg.spectral_norm(problem.jac_x(x, y) @ dphi_inv))
    rhs = weight(float(np.linalg.norm(psi.forward_point(y))))
    return lhs, rhs


def _trace_points(trace, refine=False):
    """(x, y) pairs from a trace, optionally with corrected midpoints."""
    points = [(s.x, s.y) for s in trace.samples]
    if not refine or len(points) < 2:
        return points
    problem = trace.problem
    opts = CorrectorOptions(tol=1e-10)
    refined = []
    for (x0, y0), (x1, y1) in zip(points[:-1], points[1:]):
        refined.append((x0, y0))
        xm = 0.5 * (x0 + x1)
        try:
            res = correct_full(problem, xm, 0.5 * (y0 + y1), opts)
        except ImpliftError:
            continue  # midpoint evidence is best-effort
        refined.append((xm, res.y))
    refined.append(points[-1])
    return refined


def _verdict(margin):
    return "pass" if margin >= -MARGIN_SLACK else "fail"


def growth_bound_check(trace, charts, weight, refine=False):
    """Audit LHS <= weight(|psi(y)|) on trace samples; margin = RHS - LHS."""
    problem = trace.problem
    points = _trace_points(trace, refine)
    worst = np.inf
    worst_at = points[0]
    lhs_values = []
    rhs_values = []
    for x, y in points:
        lhs, rhs = growth_lhs_rhs(problem, x, y, charts, weight)
        lhs_values.append(lhs)
        rhs_values.append(rhs)
        margin = rhs - lhs
        if margin < worst:
            worst = margin
            worst_at = (x, y)
    return CertificateReport(
        name="growth-bound",
        verdict=_verdict(worst),
        worst_margin=float(worst),
        worst_location=worst_at,
        samples_checked=len(points),
        details={"lhs": lhs_values, "rhs": rhs_values},
    )


def left_invertibility_check(trace, sigma_floor=None, refine=False):
    """Margin = min over samples of sigma_min(DyF) - sigma_floor.

    Default floor is 1e-6 times the largest sampled ||DyF|| (a dimensionless
    rank margin at the problem's scale).
    """
    problem = trace.problem
    points = _trace_points(trace, refine)
    smins = []
    smaxes = []
    for x, y in points:
        sigmas = linalg.singular_values(problem.jac_y(x, y))
        smins.append(float(sigmas[-1]))
        smaxes.append(float(sigmas[0]))
    if sigma_floor is None:
        sigma_floor = 1e-6 * max(smaxes)
    idx = int(np.argmin(smins))
    margin = smins[idx] - sigma_floor
    return CertificateReport(
        name="left-invertibility",
        verdict=_verdict(margin),
        worst_margin=float(margin),
        worst_location=points[idx],
        samples_checked=len(points),
        details={"sigma_floor": float(sigma_floor), "min_sigma": smins[idx]},
    )


def uniform_bound_check(trace, bound, refine=False):
    """Audit ||(DyF)^-1|| * ||DxF|| <= bound on a square (l = n) problem."""
    problem = trace.problem
    if problem.l != problem.n:
        raise DimensionMismatch("the constant bound check needs l == n")
    points = _trace_points(trace, refine)
    worst = np.inf
    worst_at = points[0]
    largest_lhs = 0.0
    for x, y in points:
        s = linalg.left_inverse(problem.jac_y(x, y))
        lhs = linalg.spectral_norm(s) * linalg.spectral_norm(problem.jac_x(x, y))
        largest_lhs = max(largest_lhs, lhs)
        margin = bound - lhs
        if margin < worst:
            worst = margin
            worst_at = (x, y)
    return CertificateReport(
        name="uniform-bound",
        verdict=_verdict(worst),
        worst_margin=float(worst),
        worst_location=worst_at,
        samples_checked=len(points),
        details={"bound": float(bound), "largest_lhs": largest_lhs},
    )


def diagonal_dominance_check(problem, points, dominance):
    """Rowwise diagonal dominance of DyF with excess at least `dominance`."""
    if problem.l != problem.n:
        raise DimensionMismatch("diagonal dominance needs l == n")
    points = [(np.asarray(x, dtype=np.float64), np.asarray(y, dtype=np.float64))
              for x, y in points]
    worst = np.inf
    worst_at = points[0]
    for x, y in points:
        jac = np.abs(problem.jac_y(x, y))
        excess = 2.0 * np.diag(jac) - jac.sum(axis=1)
        margin = float(excess.min()) - dominance
        if margin < worst:
            worst = margin
            worst_at = (x, y)
    return CertificateReport(
        name="diagonal-dominance",
        verdict=_verdict(worst),
        worst_margin=float(worst),
        worst_location=worst_at,
        samples_checked=len(points),
        details={"dominance": float(dominance)},
    )


def chart_independence_probe(trace, charts, alt_charts, refine=False):
    """Max over samples of ||Dpsi_alt (Dpsi)^-1|| * ||Dphi (Dphi_alt)^-1||.

    Reports the factor that transfers the growth bound between chart pairs so
    users can test candidate weights; no admissibility verdict is made.
    """
    points = _trace_points(trace, refine)
    worst = -np.inf
    worst_at = points[0]
    for x, y in points:
        if not (charts.phi.contains(x) and charts.psi.contains(y)
                and alt_charts.phi.contains(x) and alt_charts.psi.contains(y)):
            raise ChartDomainMismatch(
                f"sample (x={x}, y={y}) outside one of the chart domains")
        dpsi_inv = linalg.left_inverse(charts.psi.jac(y))
        dphi_alt_inv = linalg.left_inverse(alt_charts.phi.jac(x))
        factor = (linalg.spectral_norm(alt_charts.psi.jac(y) @ dpsi_inv)
                  * linalg.spectral_norm(charts.phi.jac(x) @ dphi_alt_inv))
        if factor > worst:
            worst = factor
            worst_at = (x, y)
    return ChartTransferReport(
        max_factor=float(worst),
        location=worst_at,
        samples_checked=len(points),
    )
