"""Analytic operators: part extraction, global exp/log, the derivation,
logarithmic derivatives, and exponential rank."""

from __future__ import annotations

import itertools
import threading
from dataclasses import dataclass

from . import constants as C
from . import _streams as S
from . import series as GS
from .budget import current_budget
from .errors import BudgetExhausted, NotPositive
from .monomials import (
    MONOMIAL_ONE,
    Term,
    TransMonomial,
    cmp_monomial,
    exp_word_terms,
    inv_monomial,
    mul_monomial,
)
from .series import GridSeries


@dataclass(frozen=True)
class SeriesSplit:
    """Decomposition into the purely large part, the constant term and the
    infinitesimal tail; the three parts sum back to the input exactly."""

    purely_infinite: GridSeries
    constant: C.Constant
    infinitesimal: GridSeries


def split(f: GridSeries) -> SeriesSplit:
    """Partition the support around the monomial 1.

    The purely large part is materialized (it must fit in the term
    budget); the infinitesimal tail stays lazy.
    """
    limit = current_budget().max_terms
    large: list[Term] = []
    const = C.C_ZERO
    i = 0
    while True:
        t = f.term(i)
        if t is None:
            break
        r = cmp_monomial(t.monom, MONOMIAL_ONE)
        if r > 0:
            large.append(t)
            if len(large) > limit:
                raise BudgetExhausted(
                    "purely large part does not fit in the term budget"
                )
            i += 1
            continue
        if r == 0:
            const = t.coeff
            i += 1
        break
    tail = GridSeries(
        S.TermStream(S.suffix_gen(f._stream, i)), f.grid
    )
    return SeriesSplit(GS.from_terms(large), const, tail)


def log_monomial(m: TransMonomial) -> GridSeries:
    """The series log(m): word factors shift one log level deeper, the
    exponent series passes through."""
    return GS.from_terms(m.log_terms())


def exp_purely_infinite(p: GridSeries) -> TransMonomial:
    """Inverse of :func:`log_monomial` on purely large series."""
    terms = list(p.iter_terms())
    return exp_word_terms(terms)


def _factorials():
    f = 1
    for n in itertools.count():
        if n:
            f *= n
        yield C.from_rational(1, f)


def exp_series(f: GridSeries) -> GridSeries:
    """Global exponential: monomial part from the purely large piece, an
    exact exp-node on the constant, and the Taylor series on the tail."""
    parts = split(f)
    mono = exp_purely_infinite(parts.purely_infinite)
    coeff = C.exp(parts.constant)
    tail = GS.taylor_sum(parts.infinitesimal, _factorials())
    return GS.scale(tail, coeff, mono)


def _log_tail_coeffs():
    yield C.C_ZERO
    for n in itertools.count(1):
        yield C.from_rational((-1) ** (n + 1), n)


def log_series(f: GridSeries) -> GridSeries:
    """Global logarithm: log of the leading monomial plus an exact
    log-node on the leading coefficient plus the Taylor tail.
    Requires a positive leading coefficient."""
    lead = GS.leading_term(f)
    r, m = lead.coeff, lead.monom
    if C.sign(r) <= 0:
        raise NotPositive("log needs a series with positive leading coefficient")
    tail = GridSeries(
        S.TermStream(S.suffix_gen(f._stream, 1)), f.grid
    )
    eps = GS.scale(tail, C.div(C.C_ONE, r), inv_monomial(m))
    out = GS.taylor_sum(eps, _log_tail_coeffs())
    log_r = C.log(r)
    if not log_r.is_zero:
        out = GS.add(out, GS.constant(log_r))
    return GS.add(log_monomial(m), out)


# ---------------------------------------------------------------------
# derivation


_mono_derivative_cache: dict[TransMonomial, tuple[Term, ...]] = {}
_mono_cache_lock = threading.Lock()


def _log_power_dagger(n: int) -> TransMonomial:
    """Logarithmic derivative of log^n(x): the monomial
    1/(x log(x) ... log^n(x))."""
    from .monomials import LogPowerWord, TransMonomial

    word = LogPowerWord((k, C.from_rational(-1)) for k in range(n + 1))
    return TransMonomial(word, ())


def monomial_derivative(m: TransMonomial) -> tuple[Term, ...]:
    """The derivative of a monomial as a finite term list: m times the
    logarithmic derivative of m."""
    hit = _mono_derivative_cache.get(m)
    if hit is not None:
        return hit
    if m.is_identity:
        out: tuple[Term, ...] = ()
    else:
        dagger_parts: list[GridSeries] = []
        for n, a in m.word.entries:
            dagger_parts.append(
                GS.monomial_series(_log_power_dagger(n), a)
            )
        if m.expo:
            dagger_parts.append(derive(GS.from_terms(m.expo)))
        dagger = GS.add_all(dagger_parts)
        out = tuple(
            Term(t.coeff, mul_monomial(m, t.monom)) for t in dagger.iter_terms()
        )
    with _mono_cache_lock:
        _mono_derivative_cache[m] = out
    return out


def derive(f: GridSeries) -> GridSeries:
    """The strongly linear derivation with x' = 1 and (exp g)' = exp(g) g'."""

    def parts():
        for t in f.iter_terms():
            d = monomial_derivative(t.monom)
            if not d:
                continue
            bound = d[0].monom
            terms = tuple(Term(C.mul(t.coeff, c), mm) for c, mm in d)
            yield bound, (lambda terms=terms: GS.from_terms(terms))

    return GS.big_sum(parts())


def dagger(f: GridSeries) -> GridSeries:
    """Logarithmic derivative f'/f; requires f nonzero."""
    GS.leading_term(f)  # raises ZeroSeries on the zero series
    return GS.mul(derive(f), GS.invert(f))


# ---------------------------------------------------------------------
# exponential rank


@dataclass(frozen=True)
class ExpRank:
    """Finite exponential rank of a series in this fragment."""

    value: int

    def __int__(self):
        return self.value

    def __eq__(self, other):
        if isinstance(other, int):
            return self.value == other
        if isinstance(other, ExpRank):
            return self.value == other.value
        return NotImplemented

    def __hash__(self):
        return hash(self.value)


_rank_cache: dict[tuple[Term, ...], int] = {}


def _materialize_all(f: GridSeries) -> tuple[Term, ...]:
    limit = current_budget().max_terms
    out: list[Term] = []
    for t in f.iter_terms():
        out.append(t)
        if len(out) > limit:
            raise BudgetExhausted("series support exceeds the term budget")
    return tuple(out)


def _rank_of_terms(terms: tuple[Term, ...]) -> int:
    hit = _rank_cache.get(terms)
    if hit is not None:
        return hit
    if not terms:
        rank = 0
    elif (
        len(terms) == 1
        and terms[0].coeff.is_one
        and terms[0].monom.bare_log_depth() is not None
    ):
        rank = 0
    else:
        rank = 0
        for t in terms:
            gamma = t.monom.log_terms()
            rank = max(rank, _rank_of_terms(gamma) + 1)
    _rank_cache[terms] = rank
    return rank


def exp_rank(f: GridSeries) -> ExpRank:
    """Exponential nesting rank: 0 for the bare iterated logs, otherwise
    one more than the largest rank among the log-exponents of the support
    monomials.  Needs the whole support, so the series must be finite
    within the term budget."""
    return ExpRank(_rank_of_terms(_materialize_all(f)))
