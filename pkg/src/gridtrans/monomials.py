"""Canonical transmonomials.

A monomial is a product ``x^a0 * log(x)^a1 * log^2(x)^a2 * ... * exp(E)``
where the exponents ``a_n`` are exact constants and ``E`` (the *exponent
series*) is a finite, purely large series: every monomial of ``E``
exceeds 1.  The iterated-log factors form the "word" part; ``exp(E)`` the
rest.  Canonical form pushes every term of ``E`` that is a bare iterated
log into the word (``exp(c*log^(n+1)(x))`` is the same monomial as
``log^n(x)^c``), so equal monomials are structurally equal.

Ordering is by the logarithm: ``m > n`` iff ``log m > log n`` as series,
which recurses into structurally shorter monomials and bottoms out at
pure words, where the lowest iterated-log index dominates.
"""

from __future__ import annotations

import threading
from typing import Iterable, NamedTuple

from . import constants as C
from .budget import current_budget
from .errors import (
    DepthExceeded,
    InvariantViolation,
    NotPurelyInfinite,
    ZeroTestInconclusive,
)


class LogPowerWord:
    """Finite map from iterated-log depth to a nonzero constant exponent.

    Depth 0 is the variable itself, depth 1 its log, and so on.
    """

    __slots__ = ("entries", "_hash")

    def __init__(self, entries: Iterable[tuple[int, C.Constant]]):
        cleaned = []
        max_depth = current_budget().max_depth
        for n, a in sorted(entries):
            if n < 0:
                raise ValueError("log depth must be a natural number")
            if n > max_depth:
                raise DepthExceeded(f"iterated-log depth {n} exceeds budget")
            if not a.is_zero:
                cleaned.append((n, a))
        object.__setattr__(self, "entries", tuple(cleaned))
        object.__setattr__(self, "_hash", None)

    def __setattr__(self, name, value):
        raise AttributeError("LogPowerWord is immutable")

    @property
    def is_trivial(self) -> bool:
        return not self.entries

    def as_dict(self) -> dict[int, C.Constant]:
        return dict(self.entries)

    def exponent(self, n: int) -> C.Constant:
        for k, a in self.entries:
            if k == n:
                return a
        return C.C_ZERO

    def mul(self, other: "LogPowerWord") -> "LogPowerWord":
        merged = self.as_dict()
        for n, a in other.entries:
            merged[n] = C.add(merged.get(n, C.C_ZERO), a)
        return LogPowerWord(merged.items())

    def inverse(self) -> "LogPowerWord":
        return LogPowerWord((n, C.neg(a)) for n, a in self.entries)

    def scale(self, c: C.Constant) -> "LogPowerWord":
        if c.is_zero:
            return LogPowerWord(())
        return LogPowerWord((n, C.mul(a, c)) for n, a in self.entries)

    def __eq__(self, other):
        return isinstance(other, LogPowerWord) and self.entries == other.entries

    def __hash__(self):
        h = self._hash
        if h is None:
            h = hash(self.entries)
            object.__setattr__(self, "_hash", h)
        return h

    def __repr__(self):
        return f"LogPowerWord({self.entries!r})"


class Term(NamedTuple):
    """One series term: an exact coefficient times a monomial."""

    coeff: C.Constant
    monom: "TransMonomial"


class TransMonomial:
    """Canonical monomial: a log-power word times exp of a purely large
    finite series, with bare iterated logs folded into the word."""

    __slots__ = ("word", "expo", "_hash", "_height", "_log_terms")

    def __init__(self, word: LogPowerWord, expo: tuple[Term, ...]):
        # internal: use make_monomial, which canonicalises
        object.__setattr__(self, "word", word)
        object.__setattr__(self, "expo", expo)
        object.__setattr__(self, "_hash", None)
        object.__setattr__(self, "_height", None)
        object.__setattr__(self, "_log_terms", None)

    def __setattr__(self, name, value):
        raise AttributeError("TransMonomial is immutable")

    # -- basic structure ------------------------------------------------

    @property
    def is_identity(self) -> bool:
        return self.word.is_trivial and not self.expo

    def bare_log_depth(self) -> int | None:
        """If this is exactly one iterated log (x, log(x), ...), its depth."""
        if self.expo or len(self.word.entries) != 1:
            return None
        n, a = self.word.entries[0]
        return n if a.is_one else None

    def height(self) -> int:
        """Exponential nesting depth: 0 for pure words."""
        h = self._height
        if h is None:
            if not self.expo:
                h = 0
            else:
                h = 1 + max(t.monom.height() for t in self.expo)
            object.__setattr__(self, "_height", h)
        return h

    def log_terms(self) -> tuple[Term, ...]:
        """The logarithm of this monomial as a finite decreasing term list."""
        cached = self._log_terms
        if cached is not None:
            return cached
        from_word = [
            Term(a, log_power(n + 1)) for n, a in self.word.entries
        ]
        # word entries are sorted by depth, so their logs already decrease;
        # expo terms carry no bare-log monomials, so the ranges are disjoint
        terms = _merge_finite(from_word, list(self.expo))
        object.__setattr__(self, "_log_terms", terms)
        return terms

    # -- equality and ordering -------------------------------------------

    def __eq__(self, other):
        if self is other:
            return True
        if not isinstance(other, TransMonomial):
            return NotImplemented
        return (
            hash(self) == hash(other)
            and self.word == other.word
            and self.expo == other.expo
        )

    def __hash__(self):
        h = self._hash
        if h is None:
            h = hash((self.word, self.expo))
            object.__setattr__(self, "_hash", h)
        return h

    def __lt__(self, other):
        return cmp_monomial(self, other) < 0

    def __le__(self, other):
        return cmp_monomial(self, other) <= 0

    def __gt__(self, other):
        return cmp_monomial(self, other) > 0

    def __ge__(self, other):
        return cmp_monomial(self, other) >= 0

    def __repr__(self):
        from .fmt import format_monomial

        return f"TransMonomial({format_monomial(self)})"


def _merge_finite(a: list[Term], b: list[Term]) -> tuple[Term, ...]:
    """Merge two strictly-decreasing term lists, adding coefficients."""
    out: list[Term] = []
    i = j = 0
    while i < len(a) and j < len(b):
        r = cmp_monomial(a[i].monom, b[j].monom)
        if r > 0:
            out.append(a[i])
            i += 1
        elif r < 0:
            out.append(b[j])
            j += 1
        else:
            s = C.add(a[i].coeff, b[j].coeff)
            if not s.is_zero:
                out.append(Term(s, a[i].monom))
            i += 1
            j += 1
    out.extend(a[i:])
    out.extend(b[j:])
    return tuple(out)


def make_monomial(
    word: LogPowerWord | Iterable[tuple[int, C.Constant]],
    expo_terms: Iterable[Term] = (),
) -> TransMonomial:
    """Build a canonical monomial, folding bare iterated logs of the
    exponent series into the word and checking that the exponent series
    is purely large."""
    if not isinstance(word, LogPowerWord):
        word = LogPowerWord(word)
    word_map = word.as_dict()
    kept: list[Term] = []
    for t in expo_terms:
        if t.coeff.is_zero:
            continue
        depth = t.monom.bare_log_depth()
        if depth is not None and depth >= 1:
            prev = word_map.get(depth - 1, C.C_ZERO)
            word_map[depth - 1] = C.add(prev, t.coeff)
        else:
            kept.append(t)
    kept.sort(key=_sort_desc_key)
    merged: list[Term] = []
    for t in kept:
        if merged and cmp_monomial(merged[-1].monom, t.monom) == 0:
            s = C.add(merged[-1].coeff, t.coeff)
            merged.pop()
            if not s.is_zero:
                merged.append(Term(s, t.monom))
        else:
            merged.append(t)
    for t in merged:
        if not is_large(t.monom):
            raise NotPurelyInfinite(
                "monomial exponent series has a term at or below 1"
            )
    m = TransMonomial(LogPowerWord(word_map.items()), tuple(merged))
    if m.height() > current_budget().max_depth:
        raise DepthExceeded(
            f"exponential tower height {m.height()} exceeds budget"
        )
    return m


class _sort_desc_key:
    """Sort adapter: decreasing monomial order."""

    __slots__ = ("t",)

    def __init__(self, t: Term):
        self.t = t

    def __lt__(self, other: "_sort_desc_key"):
        return cmp_monomial(self.t.monom, other.t.monom) > 0


MONOMIAL_ONE = TransMonomial(LogPowerWord(()), ())


def log_power(n: int, exponent: C.Constant = C.C_ONE) -> TransMonomial:
    """The monomial ``log^n(x)^exponent`` (n = 0 gives a power of x)."""
    if exponent.is_zero:
        return MONOMIAL_ONE
    return TransMonomial(LogPowerWord(((n, exponent),)), ())


def variable() -> TransMonomial:
    return log_power(0)


def mul_monomial(m1: TransMonomial, m2: TransMonomial) -> TransMonomial:
    if m1.is_identity:
        return m2
    if m2.is_identity:
        return m1
    return make_monomial(m1.word.mul(m2.word), _merge_finite(list(m1.expo), list(m2.expo)))


def inv_monomial(m: TransMonomial) -> TransMonomial:
    if m.is_identity:
        return m
    return TransMonomial(
        m.word.inverse(), tuple(Term(C.neg(c), mm) for c, mm in m.expo)
    )


def pow_monomial(m: TransMonomial, c: C.Constant) -> TransMonomial:
    """Exact monomial power with an arbitrary constant exponent."""
    if c.is_zero or m.is_identity:
        return MONOMIAL_ONE
    if c.is_one:
        return m
    return make_monomial(
        m.word.scale(c), (Term(C.mul(t.coeff, c), t.monom) for t in m.expo)
    )


def exp_word_terms(terms: Iterable[Term]) -> TransMonomial:
    """Inverse of taking the log: build the monomial with the given purely
    large series as its logarithm.  Raises NotPurelyInfinite when a term
    is not above 1."""
    return make_monomial(LogPowerWord(()), terms)


# -----------------------------------------------------------------------
# ordering


_cmp_cache: dict = {}
_cmp_lock = threading.Lock()


def cmp_monomial(m1: TransMonomial, m2: TransMonomial) -> int:
    """Total order: -1, 0 or +1.  ``m1 > m2`` iff ``log m1 > log m2``."""
    if m1 is m2:
        return 0
    key = (m1, m2)
    hit = _cmp_cache.get(key)
    if hit is not None:
        return hit
    if m1 == m2:
        r = 0
    elif not m1.expo and not m2.expo:
        r = _cmp_pure_words(m1.word, m2.word)
    else:
        r = _cmp_term_lists(m1.log_terms(), m2.log_terms())
        if r == 0:
            raise InvariantViolation(
                "distinct canonical monomials with equal logarithms"
            )
    with _cmp_lock:
        _cmp_cache[key] = r
        _cmp_cache[(m2, m1)] = -r
    return r


def _cmp_pure_words(w1: LogPowerWord, w2: LogPowerWord) -> int:
    """Lower log depth dominates: compare the first differing exponent."""
    d1, d2 = w1.as_dict(), w2.as_dict()
    for n in sorted(set(d1) | set(d2)):
        s = C.sign(C.sub(d1.get(n, C.C_ZERO), d2.get(n, C.C_ZERO)))
        if s != 0:
            return s
    return 0


def _cmp_term_lists(a: tuple[Term, ...], b: tuple[Term, ...]) -> int:
    """Sign of the difference of two finite decreasing term lists."""
    i = j = 0
    while i < len(a) and j < len(b):
        r = cmp_monomial(a[i].monom, b[j].monom)
        if r > 0:
            return C.sign(a[i].coeff)
        if r < 0:
            return -C.sign(b[j].coeff)
        s = C.sign(C.sub(a[i].coeff, b[j].coeff))
        if s != 0:
            return s
        i += 1
        j += 1
    if i < len(a):
        return C.sign(a[i].coeff)
    if j < len(b):
        return -C.sign(b[j].coeff)
    return 0


def is_large(m: TransMonomial) -> bool:
    """True when the monomial exceeds 1."""
    return cmp_monomial(m, MONOMIAL_ONE) > 0


def is_small(m: TransMonomial) -> bool:
    """True when the monomial is below 1 (infinitesimal)."""
    return cmp_monomial(m, MONOMIAL_ONE) < 0
