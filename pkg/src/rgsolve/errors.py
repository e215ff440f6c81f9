"""Exception types shared across the package."""


class RgsolveError(Exception):
    """Base class for every error raised by this package."""


class UsageError(RgsolveError):
    """The caller violated an operation's contract (shape, range, or state)."""


class GenerationError(RgsolveError):
    """A problem generator could not produce a valid draw."""


class ConvergedSignal(RgsolveError):
    """Index selection was asked to act on an already-converged state.

    Raised when the maximum loss (or distance) is zero, i.e. there is nothing
    left to select.  Callers must stop iterating instead of selecting.
    """


class StalledError(RgsolveError):
    """A row method cannot make progress; the system is inconsistent."""


class DegenerateStepError(RgsolveError):
    """An aggregate column step collapsed: the update direction lies in the null space."""


class SubsolverError(RgsolveError):
    """CGLS failed to reach its tolerance within its iteration budget."""

    def __init__(self, message: str, iterations: int, residual: float):
        super().__init__(message)
        self.iterations = iterations
        self.residual = residual


class SizeGuardError(RgsolveError):
    """The instance exceeds the desk-scale guard for spectral computations."""
