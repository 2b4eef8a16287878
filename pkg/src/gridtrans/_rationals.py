"""Rational coefficient backend.

Exact rational arithmetic is the innermost operation of the whole kernel:
every coefficient add/multiply/compare lands here.  We use gmpy2's
compiled ``mpq`` when it is importable and fall back to the stdlib
``fractions.Fraction`` otherwise; both expose the same arithmetic and the
standard numeric hash.  Set ``GRIDTRANS_PURE_RATIONALS=1`` to force the
pure-Python backend (used by the backend benchmark and to exercise the
fallback in CI).
"""

from __future__ import annotations

import numbers
import os
from fractions import Fraction

if os.environ.get("GRIDTRANS_PURE_RATIONALS") == "1":
    _impl = None
else:
    try:
        import gmpy2 as _impl
    except ImportError:  # pragma: no cover - depends on environment
        _impl = None

if _impl is not None:
    BACKEND = "gmpy2"
    _mpq = _impl.mpq

    def rational(numerator=0, denominator=1):
        return _mpq(numerator, denominator)

else:
    BACKEND = "fractions"

    def rational(numerator=0, denominator=1):
        return Fraction(numerator, denominator)


def is_rational(value) -> bool:
    """True for backend rationals, Fractions and ints alike."""
    return isinstance(value, numbers.Rational)


def as_integer_ratio(value) -> tuple[int, int]:
    return int(value.numerator), int(value.denominator)


ZERO = rational(0)
ONE = rational(1)
