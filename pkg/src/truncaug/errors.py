"""Exception and warning types shared across the package."""


class TruncaugError(Exception):
    """Base class for all library errors."""


class RowError(TruncaugError):
    """A transition or rate row violates its invariants at materialization."""

    def __init__(self, state: int, defect: float, message: str):
        super().__init__(f"state {state}: {message} (defect {defect:.3e})")
        self.state = state
        self.defect = defect


class SupportMismatchError(TruncaugError):
    """A distribution's support is not contained in the expected state set."""


class EmptySetError(TruncaugError):
    """A truncation-set construction produced no states."""


class WindowSuspectWarning(UserWarning):
    """The scan window may clip the set being constructed.

    Emitted when a sublevel or prefix construction cannot rule out that
    states beyond the window also qualify.  Diagnostic only; the returned
    set is still the correct restriction to the window.
    """


class NoConvergenceError(TruncaugError):
    """Power iteration failed to reach the step tolerance."""


class MultipleClosedClassesError(TruncaugError):
    """A unique stationary distribution was requested but several exist."""


class NoUniformMinorizationError(TruncaugError):
    """No state-independent component exists: all column minima are zero."""


class MissingTailBoundError(TruncaugError):
    """Rows carry truncated tails and no bound on g over the tail was given."""


class ConfigError(TruncaugError):
    """A study configuration is malformed or inconsistent."""
