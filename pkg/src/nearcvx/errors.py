"""Exception hierarchy shared by every module.

The CLI maps these onto exit codes, so each class carries the code it
should produce.
"""


class NearCvxError(Exception):
    exit_code = 1


class DimensionMismatch(NearCvxError, ValueError):
    exit_code = 2


class CapExceeded(NearCvxError):
    exit_code = 2


class ParseError(NearCvxError, ValueError):
    exit_code = 2


class EmptySetError(NearCvxError):
    """A polyhedron that must be nonempty turned out to be empty."""


class InfeasibleError(NearCvxError):
    pass


class UnboundedError(NearCvxError):
    pass


class HypothesisViolated(NearCvxError):
    """A theorem hypothesis required by the operation does not hold.

    ``name`` identifies which one (``"regularity"``, ``"slater"``,
    ``"ri-overlap"``, ``"continuity"``, ...).
    """

    exit_code = 3

    def __init__(self, name, message=""):
        self.name = name
        super().__init__(f"{name}: {message}" if message else name)


class InfeasiblePoint(NearCvxError):
    exit_code = 3


class PointNotInDomain(NearCvxError):
    exit_code = 3


class ImproperFunction(NearCvxError):
    exit_code = 3


class KindMismatch(NearCvxError, TypeError):
    exit_code = 2


class UnsupportedShape(NearCvxError):
    exit_code = 2


class QuadraticConstraintError(NearCvxError):
    """A quadratic functional constraint reached a polyhedral-only path."""

    exit_code = 3
