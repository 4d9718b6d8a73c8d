"""Exceptions shared across the package.

Every error carries ``where`` (module.operation that raised it) and
``hypothesis`` (the assumption that was violated), so batch validation can
name the failing stage instead of surfacing a bare traceback.
"""


class AztecMvopError(Exception):
    """Base class for all package errors."""

    def __init__(self, message: str, *, where: str = "", hypothesis: str = ""):
        self.where = where
        self.hypothesis = hypothesis
        full = f"{where}: {message}" if where else message
        if hypothesis:
            full = f"{full} [violated: {hypothesis}]"
        super().__init__(full)


class ConfigError(AztecMvopError):
    """Malformed or inconsistent run configuration."""


class DomainError(AztecMvopError):
    """Evaluation at or too near a pole, branch cut, or outside an admissible range."""


class NonConvergence(AztecMvopError):
    """Adaptive quadrature hit the node cap without the requested agreement."""


class TooCloseToContour(AztecMvopError):
    """Requested evaluation point sits inside the guard band around a contour."""


class DegreeMismatch(AztecMvopError):
    """Sampled function is not a matrix polynomial of the declared degree."""


class SingularMomentSystem(AztecMvopError):
    """The block moment system is singular or numerically near-singular."""

    def __init__(self, message: str, *, cond: float = float("inf"), **kw):
        super().__init__(message, **kw)
        self.cond = cond


class ZeroInsideContour(AztecMvopError):
    """det(P_N W) has unexpected zeros inside the factorization contour."""


class ContourGeometryImpossible(AztecMvopError):
    """No circle centered on the real axis separates the given point sets."""


class GenusZero(AztecMvopError):
    """The two middle branch points coincide; the spectral curve degenerates."""


class NonRealBranchPoint(AztecMvopError):
    """A discriminant root has an imaginary part above tolerance."""


class PathCrossesCut(AztecMvopError):
    """No admissible integration path to the requested point (side flag needed)."""


class PeriodNormalizationFailure(AztecMvopError):
    """Cycle integrals of the holomorphic differential failed their checks."""


class DegeneratePosition(AztecMvopError):
    """Special points violate the strict-position hypotheses of the explicit formulas."""


class TriangularityViolation(AztecMvopError):
    """Leading coefficient of the explicit formula is not lower triangular."""


class RouteDisagreement(AztecMvopError):
    """Two supposedly equivalent evaluation routes disagree beyond tolerance."""
