"""Work budgets.

All lazy enumeration in the kernel is budgeted: a single request may
process at most ``max_terms`` candidate monomials, constant zero tests may
refine up to ``max_precision`` bits, and towers of exponentials or
iterated logarithms may not exceed ``max_depth``.  When a budget is hit
the kernel raises :class:`~gridtrans.errors.BudgetExhausted` (or
``DepthExceeded`` / ``ZeroTestInconclusive``) rather than answering.

The active budget is ambient (a context variable) so that deeply nested
lazy streams all see the same limits without threading a parameter
through every call.
"""

from __future__ import annotations

import contextlib
from contextvars import ContextVar
from dataclasses import dataclass


@dataclass(frozen=True)
class Budget:
    """Resource limits for kernel operations.  All fields positive."""

    max_terms: int = 256
    max_precision: int = 4096
    max_depth: int = 8

    def __post_init__(self):
        if self.max_terms < 1 or self.max_precision < 1 or self.max_depth < 1:
            raise ValueError("budget limits must be positive")


DEFAULT_BUDGET = Budget()

_current: ContextVar[Budget] = ContextVar("gridtrans_budget", default=DEFAULT_BUDGET)


def current_budget() -> Budget:
    return _current.get()


@contextlib.contextmanager
def use_budget(budget: Budget | None = None, **overrides):
    """Run a block under a different budget.

    Either pass a :class:`Budget` or keyword overrides of the current one.
    """
    if budget is None:
        base = _current.get()
        budget = Budget(
            max_terms=overrides.pop("max_terms", base.max_terms),
            max_precision=overrides.pop("max_precision", base.max_precision),
            max_depth=overrides.pop("max_depth", base.max_depth),
        )
        if overrides:
            raise TypeError(f"unknown budget fields: {sorted(overrides)}")
    token = _current.set(budget)
    try:
        yield budget
    finally:
        _current.reset(token)
