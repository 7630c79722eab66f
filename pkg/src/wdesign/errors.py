"""Exception types shared across the package."""


class WdesignError(Exception):
    """Base class for all errors raised by this package."""


class NumericalError(WdesignError):
    """An underlying numerical routine failed to converge.

    The offending matrix is attached so the failure can be reproduced.
    """

    def __init__(self, message, matrix=None):
        super().__init__(message)
        self.matrix = matrix


class DomainError(WdesignError, ValueError):
    """Input lies outside the mathematical domain of an operation."""


class SpaceError(WdesignError):
    """A column-space requirement is violated."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class FeasibilityError(WdesignError):
    """Target functions are not estimable under the given design."""

    def __init__(self, message, columns=()):
        super().__init__(message)
        self.columns = tuple(columns)


class SingularWeightError(WdesignError):
    """Operation requires a positive definite weight matrix."""


class RankError(WdesignError):
    """System rank does not match what the operation requires."""


class SearchSpaceError(WdesignError):
    """Enumeration space exceeds the exhaustive-search envelope."""


class InternalConsistencyError(WdesignError):
    """A numerical invariant that must hold by theory was violated."""


class ParseError(WdesignError):
    """Problem file is malformed or inconsistent."""
