"""Exception types shared across the package."""


class PabisimError(Exception):
    """Base class; the CLI maps these to exit code 2 unless noted."""


class RejectedInput(PabisimError, ValueError):
    """An argument violates an operation's precondition."""


class ModelError(RejectedInput):
    """A model or certificate file failed to parse or validate."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


class NotEnabled(RejectedInput):
    """A lifted step was requested from a distribution that cannot take it."""

    def __init__(self, state: str, action: str):
        self.state = state
        self.action = action
        super().__init__(f"not-enabled: state {state} has no {action}-transition")


class CapExceeded(PabisimError):
    """An enumeration grew past the configured node cap."""
