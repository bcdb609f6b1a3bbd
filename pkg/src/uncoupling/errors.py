"""Exception types raised across the package."""


class UncouplingError(Exception):
    """Base class for all errors raised by this package."""


class DimensionMismatch(UncouplingError, ValueError):
    pass


class SingularMatrix(UncouplingError, ArithmeticError):
    pass


class SingularPivot(SingularMatrix):
    """The designated pivot entry of a pivot matrix is zero."""


class InsufficientPoints(UncouplingError):
    """The field has too few usable evaluation points for an interpolation solve."""


class DuplicatePoint(UncouplingError, ValueError):
    pass


class NotCyclic(UncouplingError):
    """The candidate vector does not generate the whole module."""


class ExhaustedTries(UncouplingError):
    pass


class NonGeneric(UncouplingError):
    """Abramov-Zima triangularisation stopped early.

    ``partial`` holds the rows built so far and ``ell`` the order reached.
    """

    def __init__(self, message, ell=None, partial=None):
        super().__init__(message)
        self.ell = ell
        self.partial = partial


class NotOrdinaryPoint(UncouplingError, ValueError):
    pass


class BoundViolated(UncouplingError, AssertionError):
    pass


class ShapeError(UncouplingError, AssertionError):
    """A phase of the DBZ algorithm did not reach its target shape."""


class ParseError(UncouplingError, ValueError):
    pass
