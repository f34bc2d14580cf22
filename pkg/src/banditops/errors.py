"""Error taxonomy shared across the package.

Failures inside a running simulation are *data* (they become classified
issues), so these exceptions only surface at API boundaries: bad caller
input, invalid configuration, or genuine numerical breakdown.
"""


class BanditOpsError(Exception):
    """Base class for package errors."""


class RejectedInput(BanditOpsError, ValueError):
    """Caller-supplied value violates an operation precondition."""


class ConfigurationError(BanditOpsError, ValueError):
    """Profile or run configuration is internally inconsistent."""


class NumericalError(BanditOpsError, ArithmeticError):
    """Linear algebra failed (singular / non-PD matrix); carries diagnostics."""

    def __init__(self, message: str, diagnostics: dict | None = None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class RosterDesyncError(BanditOpsError, RuntimeError):
    """Participant roster and data batch disagree about who is active."""

    def __init__(self, message: str, extra: tuple = (), missing: tuple = ()):
        super().__init__(message)
        self.extra = tuple(extra)
        self.missing = tuple(missing)


class NumericalWarning(UserWarning):
    """Non-fatal numerical degradation (e.g. a variance clamped at zero)."""
