"""Exception types shared across the package."""


class SwitchfitError(Exception):
    """Base class for estimation-specific failures."""


class NumericalDegeneracyError(SwitchfitError):
    """A filter normalization constant vanished or went non-finite.

    Carries the 1-based index of the emission step that failed and, when
    raised inside an EM loop, the iteration number and the partial
    log-likelihood trace accumulated so far.
    """

    def __init__(self, message, step=None, iteration=None, trace=None):
        super().__init__(message)
        self.step = step
        self.iteration = iteration
        self.trace = list(trace) if trace is not None else []


class EstimationDegenerateError(SwitchfitError):
    """An M-step had no usable mass (e.g. all expected jump counts zero)."""

    def __init__(self, message, iteration=None, trace=None):
        super().__init__(message)
        self.iteration = iteration
        self.trace = list(trace) if trace is not None else []


class InstanceTooLargeError(ValueError):
    """The exact enumeration oracle refused an instance (too many paths)."""
