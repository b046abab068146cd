"""Exception types shared across the package."""


class ImpliftError(Exception):
    """Base class for all errors raised by this package."""


class DimensionMismatch(ImpliftError):
    """Array shapes are incompatible with the requested operation."""


class NonFiniteInput(ImpliftError):
    """An input array contains NaN or infinity."""


class RankDeficient(ImpliftError):
    """A matrix that must have full column rank does not.

    Carries the offending smallest singular value in ``sigma_min``.
    """

    def __init__(self, sigma_min, message=None):
        self.sigma_min = float(sigma_min)
        super().__init__(message or f"rank deficient (sigma_min={sigma_min:.3e})")


class DomainViolation(ImpliftError):
    """A point lies outside the declared open domain."""


class SeedNotOnZ(ImpliftError):
    """The seed residual norm exceeds the seed tolerance."""


class SeedRankDeficient(ImpliftError):
    """The y-Jacobian at the seed has no left inverse."""


class ChartDomainMismatch(ImpliftError):
    """Chart domains do not cover the points they are applied to."""


class NonMonotone(ImpliftError):
    """A scalar map required to be strictly monotone is not."""


class NonPositiveValue(ImpliftError):
    """A weight evaluator returned a value <= 0."""


class NoConvergence(ImpliftError):
    """The corrector exhausted its iteration budget."""

    def __init__(self, residual_norms, message=None):
        self.residual_norms = list(residual_norms)
        super().__init__(message or
                         f"no convergence after {len(self.residual_norms) - 1} iterations "
                         f"(residual {self.residual_norms[-1]:.3e})")


class RankLoss(ImpliftError):
    """The y-Jacobian lost full column rank at an iterate."""


class BoundaryEscape(ImpliftError):
    """An iterate left the open y-domain."""


class PredictorBlowup(ImpliftError):
    """The predicted step is implausibly large or non-finite."""


class Unreachable(ImpliftError):
    """A target point could not be reached by lifting a path.

    ``reason`` is a short string; ``trace`` (optional) is the failed trace.
    """

    def __init__(self, reason, trace=None, message=None):
        self.reason = reason
        self.trace = trace
        super().__init__(message or f"target unreachable: {reason}")


class InvalidParams(ImpliftError):
    """Example constructor parameters are out of range."""


class DegenerateTube(ImpliftError):
    """The tube construction's curve has a vanishing tangent."""


class UnknownExample(ImpliftError):
    """No bundled example with the requested name."""


class ExpressionError(ImpliftError):
    """An inline residual expression failed to parse or evaluate."""


class ConfigError(ImpliftError):
    """A scenario configuration is malformed."""
