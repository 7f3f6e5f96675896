"""Exception hierarchy shared by the library and the CLI."""


class ApolloError(Exception):
    """Base class for all library errors."""


class NonDescartesError(ApolloError, ValueError):
    """The quadruple does not satisfy the Descartes form Q(v) = 0."""


class NonTerminatingError(ApolloError, ValueError):
    """Root reduction failed to make progress; the input is not a packing quadruple."""


class NoRealSolutionError(ApolloError, ValueError):
    """Three curvatures with a negative Descartes radicand."""


class InvalidRootError(ApolloError, ValueError):
    """A packing root fails the form, the sign pattern, or is not reduced."""


class BudgetExceededError(ApolloError, RuntimeError):
    """A traversal hit its node cap."""


class DuplicateThresholdError(ApolloError, ValueError):
    """Threshold grid is not strictly increasing."""


class InsufficientDataError(ApolloError, ValueError):
    """Too few usable rows for a fit."""


class DomainError(ApolloError, ValueError):
    """Argument outside the domain where a formula is defined."""


class ZeroCoordinateError(ApolloError, ValueError):
    """A coordinate selected for an almost-prime census vanishes."""


class EmptyInputError(ApolloError, ValueError):
    """An operation that needs at least one circle received none."""


class ResolutionWarning(UserWarning):
    """The circle cutoff is too coarse for the requested box sizes."""
