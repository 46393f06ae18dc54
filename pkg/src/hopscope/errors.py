"""Exception hierarchy shared across the package."""


class HopscopeError(Exception):
    """Base class for all errors raised by this package."""


class InputError(HopscopeError, ValueError):
    """Malformed or out-of-contract input (bad shapes, indices, files)."""


class CountOverflowError(HopscopeError, OverflowError):
    """A walk-count result exceeds the 64-bit integer range.

    Raised instead of wrapping silently; the count semantics of adjacency
    powers are exact or they are nothing.
    """


class LoopHypothesisError(HopscopeError):
    """The structural precondition of a loop inclusion check is not met.

    Distinct from a check failure: the property was never asserted because
    its hypothesis (self-loops everywhere, symmetric support, an m-cycle)
    does not hold for the given graph.
    """


class NumericError(HopscopeError):
    """Non-finite values appeared during a forward pass or training run."""

    def __init__(self, message: str, epoch: int | None = None):
        super().__init__(message)
        self.epoch = epoch


class DatasetError(HopscopeError):
    """A dataset directory or file could not be loaded."""
