class HulcError(Exception):
    """Base class for errors raised by this package."""


class DomainError(HulcError, ValueError):
    """An argument lies outside the domain of the requested quantity."""


class InfiniteSplitsError(DomainError):
    """No finite number of splits reaches the requested level."""


class InfeasibleSplitError(HulcError, ValueError):
    """The data cannot be cut into the requested number of splits."""

    def __init__(self, message, n=None, b=None, min_split_size=None):
        super().__init__(message)
        self.n = n
        self.b = b
        self.min_split_size = min_split_size


class EstimationError(HulcError, RuntimeError):
    """An estimator failed on a data slice."""

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class DeltaClipError(HulcError, RuntimeError):
    """Estimated median bias exceeded the cap and strict mode was requested."""
