"""Exception types raised by mpcop."""


class MPError(Exception):
    """Base class for all mpcop errors."""


class DomainError(MPError, ValueError):
    """An argument lies outside the domain of the operation."""


class ConvergenceError(MPError, RuntimeError):
    """An iterative procedure failed to converge or to bracket a root."""


class DegenerateOrbitError(MPError):
    """The orbit collapsed onto too few distinct points to define a measure."""


class ResolutionError(MPError):
    """The grid is too coarse to resolve every discontinuity of the iterate."""


class DimensionError(MPError, ValueError):
    """A documented resource cap (lag or dimension) was exceeded."""


class InsufficientDataError(MPError):
    """Too few points on either branch to fit a support line."""


class SingularFitError(InsufficientDataError):
    """All abscissae used in a least-squares fit coincide."""


class InvalidEstimateError(MPError, ValueError):
    """The fitted discontinuity point falls outside (0, 1)."""
