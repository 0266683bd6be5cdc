"""
Error types for the GSS toolkit.
Each error carries the code string used in reports and CLI messages.
"""

from typing import Optional


class GSSError(Exception):
    """Base class for toolkit errors."""
    code = "GSS_ERROR"

    def __init__(self, message: str):
        super().__init__(message)
        self.message = message

    def __str__(self):
        return f"{self.code}: {self.message}"


class InvalidParamsError(GSSError):
    code = "INVALID_PARAMS"


class ZeroTotalError(GSSError):
    code = "ZERO_TOTAL"


class RegimeMismatchError(GSSError):
    code = "REGIME_MISMATCH"


class BudgetExceededError(GSSError):
    """Raised when an enumeration would exceed the configured budget."""
    code = "BUDGET_EXCEEDED"

    def __init__(self, message: str, size: Optional[int] = None, budget: Optional[int] = None):
        super().__init__(message)
        self.size = size
        self.budget = budget


class LengthExceedsFieldError(GSSError):
    code = "LENGTH_EXCEEDS_FIELD"


class LengthMismatchError(GSSError):
    code = "LENGTH_MISMATCH"


class TooManyErasuresError(GSSError):
    code = "TOO_MANY_ERASURES"


class SingularMatrixError(GSSError):
    # Never expected for a valid MDS generator
    code = "SINGULAR"


class EmptyFirstSlotError(GSSError):
    code = "EMPTY_FIRST_SLOT"


class FramingError(GSSError):
    code = "FRAMING"
