"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class RangeError(ValueError):
    """A query falls outside tabulated data."""


class GridError(ValueError):
    """An evaluation grid violates its preconditions (empty, unsorted, ...)."""


class BreakpointError(ValueError):
    """A quadrature was requested exactly at a modulus breakpoint."""


class PreconditionError(ValueError):
    """A documented operation precondition does not hold."""


class ConfigError(ValueError):
    """A run configuration failed schema validation."""


class BlowUpError(RuntimeError):
    """The time stepper produced non-finite values."""

    def __init__(self, message, last_good_time=None):
        super().__init__(message)
        self.last_good_time = last_good_time


class EntryConditionError(RuntimeError):
    """Modulus tracking refused to start because the entry condition fails."""

    def __init__(self, message, deficit=None, violating_separation=None):
        super().__init__(message)
        self.deficit = deficit
        self.violating_separation = violating_separation
