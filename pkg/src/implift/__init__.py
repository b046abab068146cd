"""implift: global implicit functions by numerical path lifting.

Given F(x, y) = 0 with a seed zero, the package lifts paths in x-space to
paths on the zero set (predictor-corrector on the induced ODE), evaluates the
resulting implicit function y = g(x) anywhere on the traced component, and
audits the hypotheses that guarantee g exists globally: left-invertibility of
the y-Jacobian, a chart-transformed growth bound against an admissible weight
function, and loop-closure (monodromy) probes that expose multiple sheets.
"""

from . import linalg
from .atlas import MonodromyResult, PathIndependenceResult, SolutionAtlas
from .charts import (Chart, ChartPair, affine_chart, chart_roundtrip_check,
                     identity_chart, psi_from_scalar_solution,
                     tangent_box_chart, transformed_problem)
from .certify import (CertificateReport, chart_independence_probe,
                      diagonal_dominance_check, growth_bound_check,
                      uniform_bound_check, left_invertibility_check)
from .corrector import CorrectorOptions, CorrectorResult, correct_full, newton_correct
from .errors import (BoundaryEscape, ChartDomainMismatch, ConfigError,
                     DegenerateTube, DimensionMismatch, DomainViolation,
                     ExpressionError, ImpliftError, InvalidParams,
                     NoConvergence, NonFiniteInput, NonMonotone,
                     NonPositiveValue, PredictorBlowup, RankDeficient,
                     RankLoss, SeedNotOnZ, SeedRankDeficient, UnknownExample,
                     Unreachable)
from .problem import Box, ImplicitProblem, validate_seed
from .tracer import (CirclePath, ChartLinePath, PolylinePath, SegmentPath,
                     Trace, TraceSample, TraceStatus, TracerOptions,
                     lift_path, step)
from .weights import AdmissibilityReport, Weight, check_weight

__version__ = "0.1.0"
