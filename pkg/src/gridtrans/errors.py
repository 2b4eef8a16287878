"""Exception taxonomy for the kernel.

Every failure mode the kernel can hit is a distinct exception type, so
callers (and the checking harness) can tell an honest "ran out of budget"
apart from a genuine domain violation.  No operation ever silently guesses.
"""


class KernelError(Exception):
    """Base class for all kernel errors."""


class DomainError(KernelError):
    """A constant expression left the domain of its operations
    (log of a value not provably positive, division by zero)."""


class ZeroTestInconclusive(KernelError):
    """A constant could not be separated from zero: it does not simplify
    to 0 structurally and interval refinement up to the precision budget
    still straddles zero."""


class ZeroSeries(KernelError):
    """An operation that needs a nonzero series (leading term, inversion,
    logarithmic derivative) was given the zero series."""


class BudgetExhausted(KernelError):
    """A lazy enumeration processed more candidate terms than the budget
    allows without settling the answer.  Typically deep cancellation."""


class NotPurelyInfinite(KernelError):
    """Monomial exponentiation was asked for a series with a term that is
    not large (some monomial at or below 1)."""


class NotPositive(KernelError):
    """log (or a fractional power) of a series whose leading coefficient
    is not positive."""


class NotAboveReals(KernelError):
    """Composition requires the right-hand series to exceed every real
    constant; this one does not."""


class DepthExceeded(KernelError):
    """A construction needed an iterated-log index or an exponential
    nesting level beyond the depth budget."""


class PreconditionViolated(KernelError):
    """A stated precondition of a high-level operation failed.  Carries
    which one in ``.which``."""

    def __init__(self, which: str, message: str = ""):
        self.which = which
        super().__init__(message or which)


class ExpressionSyntaxError(KernelError):
    """Surface-syntax error, with 1-based position information."""

    def __init__(self, message: str, line: int, column: int):
        self.line = line
        self.column = column
        super().__init__(f"{message} (line {line}, column {column})")


class InvariantViolation(KernelError):
    """An internal invariant failed.  Raised instead of returning a value
    that might be wrong; indicates a kernel bug."""
