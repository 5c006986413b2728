"""Exception types shared across the toolkit."""


class TangleproofError(Exception):
    """Base class for all package errors."""


class DomainError(TangleproofError):
    """An argument lies outside the region where an operation is valid
    (division by an interval containing zero, evaluation outside a bidisk,
    a point outside a certified-invertible region)."""


class MapDomainError(DomainError):
    """A point (or box) could not be certified inside the domain of the map."""


class SingularError(TangleproofError):
    """An interval matrix could not be certified invertible
    (determinant enclosure contains zero)."""


class NumericalError(TangleproofError):
    """A computation produced non-finite values."""


class SolveError(TangleproofError):
    """An iterative solve (scalar/coefficient-space Newton) failed to converge
    or its verdict was inconclusive."""


class OrderError(TangleproofError):
    """Endpoint enclosures overlap or violate the required ordering."""


class IncompleteError(TangleproofError):
    """A certificate assembly is missing a required ingredient
    (e.g. an allowed transition without a covering or cone certificate)."""
