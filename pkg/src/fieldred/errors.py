"""Exception types shared across modules; the CLI maps them to exit codes."""

from .gf import FieldError


class BudgetExceeded(RuntimeError):
    """A search ran out of nodes or time; the answer is unknown."""


class UnsupportedSize(ValueError):
    """Parameters are outside the range where an exhaustive method is allowed."""


class InvariantViolation(AssertionError):
    """An internal consistency check failed."""


__all__ = ["FieldError", "BudgetExceeded", "UnsupportedSize", "InvariantViolation"]
