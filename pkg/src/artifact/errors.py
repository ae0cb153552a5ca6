"""Exception types shared by every module."""


class ArtifactError(Exception):
    """Base class for all errors raised by the package."""


class InvalidInputError(ArtifactError, ValueError):
    pass


class InvalidStateError(ArtifactError, RuntimeError):
    """A point left the declared phase space or became non-finite."""


class DegenerateFrameError(ArtifactError, ArithmeticError):
    """A frame lost rank during reorthonormalization.

    ``index`` is the column whose triangular pivot fell below tolerance and
    ``step`` is the orbit step at which it happened (``None`` outside orbits).
    """

    def __init__(self, message, index, step=None):
        super().__init__(message)
        self.index = index
        self.step = step


class UnsupportedMapError(ArtifactError, TypeError):
    pass


class ResourceError(ArtifactError, MemoryError):
    """A brute-force computation would exceed its budget.

    ``feasible`` names the largest parameter value that fits the budget.
    """

    def __init__(self, message, feasible=None):
        super().__init__(message)
        self.feasible = feasible
