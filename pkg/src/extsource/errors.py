"""Exception hierarchy.

Domain errors (bad inputs, points on cuts or too close to branch points)
derive from :class:`DomainError`; failures of a numerical procedure derive
from :class:`NumericalError`.  The CLI maps the former to exit status 2 and
the latter to exit status 1.
"""


class ExtSourceError(Exception):
    pass


class DomainError(ExtSourceError, ValueError):
    pass


class NumericalError(ExtSourceError, ArithmeticError):
    pass


class UnsupportedPhase(DomainError):
    """Requested geometry exists only for 0 < a < 1."""


class BranchPointProximity(DomainError):
    pass


class PoleAtSource(DomainError):
    pass


class OnCut(DomainError):
    """A point lies on a branch cut and no side was given."""


class OnRayError(DomainError):
    pass


# local parametrix delegates its sector checks to phi_matrix
SectorRayProximity = OnRayError


class OutsideDisk(DomainError):
    pass


class InsufficientDecade(DomainError):
    pass


class PathBlocked(NumericalError):
    pass


class ExtrapolationUnstable(NumericalError):
    pass


class NonConvergence(NumericalError):
    pass


class CurveNotFound(NumericalError):
    pass


class IllConditioned(NumericalError):
    pass


class EigenFail(NumericalError):
    pass


class NonIntersectViolation(NumericalError):
    pass
