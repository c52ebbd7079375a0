"""Exception hierarchy shared by the package and mapped to CLI exit codes."""


class TileGraphError(Exception):
    """Base class for all package errors."""


class ValidationError(TileGraphError, ValueError):
    """A precondition on user input or parameters does not hold (exit code 2)."""


class DimensionError(ValidationError):
    pass


class ParameterError(ValidationError):
    pass


class BudgetExceededError(TileGraphError):
    """Refusal to build something larger than the configured budget (exit code 3)."""

    def __init__(self, what: str, required: int, allowed: int):
        self.what = what
        self.required = required
        self.allowed = allowed
        super().__init__(f"{what}: required {required} exceeds budget {allowed}")


class InvariantError(TileGraphError):
    """An internal or mathematical invariant failed on a constructed object (exit code 4)."""


class DisconnectedGraphError(InvariantError):
    pass
