"""Grid-based series: exact field arithmetic and the dominance calculus.

A :class:`GridSeries` is a lazily enumerated sum of terms in strictly
decreasing monomial order, together with grid metadata: an anchor
monomial and a set of infinitesimal generators such that every emitted
monomial is the anchor times a product of generators.  Laziness is
leading-term-exact: comparisons and dominance verdicts never depend on
how many trailing terms have been materialized; when an answer would need
more than the term budget (deep cancellation) the kernel raises
:class:`BudgetExhausted` instead of guessing.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass
from typing import Callable, Iterable, Iterator

from . import constants as C
from . import _streams as S
from .budget import Budget, use_budget  # re-exported
from .errors import (
    BudgetExhausted,
    NotPositive,
    ZeroSeries,
)
from .monomials import (
    MONOMIAL_ONE,
    Term,
    TransMonomial,
    cmp_monomial,
    inv_monomial,
    is_small,
    log_power,
    mul_monomial,
    pow_monomial,
)

__all__ = [
    "Budget",
    "Dominance",
    "DominanceRel",
    "GridSeries",
    "Ordering",
    "add",
    "compare",
    "constant",
    "dominance",
    "enumerate_terms",
    "from_terms",
    "invert",
    "leading_term",
    "monomial_series",
    "mul",
    "neg",
    "one",
    "power",
    "scale",
    "sub",
    "taylor_sum",
    "use_budget",
    "variable",
    "zero",
]


class Ordering(enum.IntEnum):
    LESS = -1
    EQUAL = 0
    GREATER = 1


class Dominance(enum.Enum):
    PREC_STRICT = "<<"
    ASYMP = "~~"
    SUCC_STRICT = ">>"


@dataclass(frozen=True)
class DominanceRel:
    """Outcome of comparing two nonzero series by order of growth."""

    relation: Dominance
    similar: bool = False

    def __post_init__(self):
        if self.similar and self.relation is not Dominance.ASYMP:
            raise ValueError("similar is only meaningful for asymptotic pairs")


class Grid:
    """Grid metadata: anchor monomial and infinitesimal generators.

    For series built by closed-form rules (explicit terms, sums, products)
    the grid is static.  Streams whose support unfolds as they run
    (geometric tails, derivatives, compositions) report a snapshot grid:
    anchor plus the generators observed so far; every emitted monomial
    lies in the snapshot taken after its emission.
    """

    def __init__(
        self,
        anchor: TransMonomial | Callable[[], TransMonomial],
        gens: frozenset[TransMonomial] | Callable[[], frozenset[TransMonomial]],
    ):
        self._anchor = anchor
        self._gens = gens

    def anchor(self) -> TransMonomial:
        a = self._anchor
        return a() if callable(a) else a

    def generators(self) -> frozenset[TransMonomial]:
        g = self._gens
        out = g() if callable(g) else g
        return frozenset(m for m in out if not m.is_identity)


def _snapshot_grid(stream: S.TermStream) -> Grid:
    def anchor() -> TransMonomial:
        known = stream.known_terms()
        return known[0].monom if known else MONOMIAL_ONE

    def gens() -> frozenset[TransMonomial]:
        known = stream.known_terms()
        if not known:
            return frozenset()
        top = known[0].monom
        inv = inv_monomial(top)
        return frozenset(mul_monomial(t.monom, inv) for t in known[1:])

    return Grid(anchor, gens)


class GridSeries:
    """A grid-based series.  Immutable; all operations return new series."""

    def __init__(self, stream: S.TermStream, grid: Grid):
        self._stream = stream
        self.grid = grid

    # -- enumeration ----------------------------------------------------

    def term(self, i: int) -> Term | None:
        return self._stream.term(i)

    def iter_terms(self) -> Iterator[Term]:
        return self._stream.iter_terms()

    def is_zero(self) -> bool:
        """Certified zero test: True only when the stream provably ends
        with no terms.  May raise BudgetExhausted."""
        return self.term(0) is None

    def known_terms(self) -> tuple[Term, ...]:
        return self._stream.known_terms()

    def __repr__(self):
        from .fmt import format_series

        try:
            return f"GridSeries({format_series(self, max_terms=6)})"
        except Exception:  # repr must not raise during debugging
            known = ", ".join(repr(t) for t in self.known_terms())
            return f"GridSeries(<unforced: {known}>)"


# ---------------------------------------------------------------------
# constructors


def zero() -> GridSeries:
    return GridSeries(S.EMPTY_STREAM, Grid(MONOMIAL_ONE, frozenset()))


def from_terms(terms: Iterable[Term]) -> GridSeries:
    """Series with explicit, strictly decreasing, zero-free terms."""
    stream = S.TermStream.from_terms(terms)
    known = stream.known_terms()
    if not known:
        return zero()
    top = known[0].monom
    inv = inv_monomial(top)
    gens = frozenset(
        mul_monomial(t.monom, inv) for t in known[1:]
    )
    return GridSeries(stream, Grid(top, gens))


def constant(c) -> GridSeries:
    c = C._coerce(c)
    if c.is_zero:
        return zero()
    return from_terms([Term(c, MONOMIAL_ONE)])


def one() -> GridSeries:
    return constant(C.C_ONE)


def monomial_series(m: TransMonomial, coeff=C.C_ONE) -> GridSeries:
    coeff = C._coerce(coeff)
    if coeff.is_zero:
        return zero()
    return from_terms([Term(coeff, m)])


def variable() -> GridSeries:
    return monomial_series(log_power(0))


def log_power_series(n: int) -> GridSeries:
    return monomial_series(log_power(n))


# ---------------------------------------------------------------------
# arithmetic


def _static_grids(*fs: GridSeries) -> list[Grid] | None:
    grids = [f.grid for f in fs]
    if all(not callable(g._anchor) and not callable(g._gens) for g in grids):
        return grids
    return None


def add(f: GridSeries, g: GridSeries) -> GridSeries:
    stream = S.TermStream(S.merge_gen((f._stream, g._stream)))
    grids = _static_grids(f, g)
    if grids is None:
        return GridSeries(stream, _snapshot_grid(stream))
    ga, gb = grids
    a1, a2 = ga.anchor(), gb.anchor()
    anchor = a1 if cmp_monomial(a1, a2) >= 0 else a2
    gens = set(ga.generators()) | set(gb.generators())
    inv = inv_monomial(anchor)
    for a in (a1, a2):
        ratio = mul_monomial(a, inv)
        if not ratio.is_identity:
            gens.add(ratio)
    return GridSeries(stream, Grid(anchor, frozenset(gens)))


def add_all(fs: Iterable[GridSeries]) -> GridSeries:
    fs = list(fs)
    if not fs:
        return zero()
    out = fs[0]
    for f in fs[1:]:
        out = add(out, f)
    return out


def neg(f: GridSeries) -> GridSeries:
    return scale(f, C.from_rational(-1), MONOMIAL_ONE)


def sub(f: GridSeries, g: GridSeries) -> GridSeries:
    return add(f, neg(g))


def scale(f: GridSeries, coeff, monom: TransMonomial = MONOMIAL_ONE) -> GridSeries:
    """Multiply by a single term coeff*monom."""
    coeff = C._coerce(coeff)
    if coeff.is_zero:
        return zero()
    if coeff.is_one and monom.is_identity:
        return f
    stream = S.TermStream(S.scale_gen(f._stream, coeff, monom))
    grids = _static_grids(f)
    if grids is None:
        return GridSeries(stream, _snapshot_grid(stream))
    [gf] = grids
    return GridSeries(
        stream, Grid(mul_monomial(monom, gf.anchor()), gf.generators())
    )


def mul(f: GridSeries, g: GridSeries) -> GridSeries:
    stream = S.TermStream(S.product_gen(f._stream, g._stream))
    grids = _static_grids(f, g)
    if grids is None:
        return GridSeries(stream, _snapshot_grid(stream))
    ga, gb = grids
    return GridSeries(
        stream,
        Grid(
            mul_monomial(ga.anchor(), gb.anchor()),
            ga.generators() | gb.generators(),
        ),
    )


def taylor_sum(eps: GridSeries, coeffs: Iterable) -> GridSeries:
    """Sum of coeff[n] * eps**n for an infinitesimal eps.

    ``coeffs`` yields exact constants starting at n = 0 and may be
    infinite; zero coefficients are skipped.  The powers of eps share one
    memoized chain, and the n-th part is bounded by the n-th power of the
    leading monomial of eps, which decreases strictly.
    """
    lead = eps.term(0)
    coeff_iter = iter(coeffs)
    if lead is None:
        try:
            c0 = C._coerce(next(coeff_iter))
        except StopIteration:
            return zero()
        return constant(c0)
    lam = lead.monom
    if not is_small(lam):
        raise ValueError("taylor_sum requires an infinitesimal series")
    powers: list[GridSeries] = [one(), eps]

    def parts() -> Iterator[S.SumPart]:
        for n, c in enumerate(coeff_iter):
            c = C._coerce(c)
            if c.is_zero:
                continue
            while len(powers) <= n:
                powers.append(mul(powers[-1], eps))
            bound = pow_monomial(lam, C.from_rational(n))
            pw = powers[n]
            yield bound, (lambda pw=pw, c=c: scale(pw, c)._stream)

    stream = S.TermStream(S.big_sum_gen(parts()))
    return GridSeries(stream, _snapshot_grid(stream))


def big_sum(parts: Iterator[tuple[TransMonomial, Callable[[], GridSeries]]]) -> GridSeries:
    """Sum of a sequence of series with strictly decreasing lead bounds."""

    def stream_parts() -> Iterator[S.SumPart]:
        for bound, thunk in parts:
            yield bound, (lambda thunk=thunk: thunk()._stream)

    stream = S.TermStream(S.big_sum_gen(stream_parts()))
    return GridSeries(stream, _snapshot_grid(stream))


def leading_term(f: GridSeries) -> Term:
    t = f.term(0)
    if t is None:
        raise ZeroSeries("the zero series has no leading term")
    return t


def invert(f: GridSeries) -> GridSeries:
    """Multiplicative inverse via the geometric series on the tail ratio."""
    lead = leading_term(f)
    r, m = lead.coeff, lead.monom
    inv_lead_coeff = C.div(C.C_ONE, r)
    inv_lead_mono = inv_monomial(m)
    # eps = f / (r*m) - 1, strictly below 1
    tail = GridSeries(
        S.TermStream(S.suffix_gen(f._stream, 1)), _snapshot_grid(f._stream)
    )
    eps = scale(tail, inv_lead_coeff, inv_lead_mono)
    geom = taylor_sum(
        eps, (C.from_rational((-1) ** n) for n in itertools.count())
    )
    return scale(geom, inv_lead_coeff, inv_lead_mono)


def power(f: GridSeries, c) -> GridSeries:
    """f**c for an exact constant exponent; requires f > 0."""
    c = C._coerce(c)
    lead = leading_term(f)
    if C.sign(lead.coeff) <= 0:
        raise NotPositive("power base must have a positive leading coefficient")
    if c.is_zero:
        return one()
    if c.is_one:
        return f
    if f.term(1) is None:
        # single-term fast path: exact monomial power
        new_coeff = C.exp(C.mul(c, C.log(lead.coeff)))
        return monomial_series(pow_monomial(lead.monom, c), new_coeff)
    from .analysis import exp_series, log_series

    return exp_series(scale(log_series(f), c))


# ---------------------------------------------------------------------
# comparisons


def compare(a: GridSeries, b: GridSeries) -> Ordering:
    """Sign of a - b.  EQUAL only when the difference provably has no
    terms (the streams exhaust); deep cancellation raises BudgetExhausted."""
    d = sub(a, b)
    t = d.term(0)
    if t is None:
        return Ordering.EQUAL
    return Ordering(C.sign(t.coeff))


def sign_of(f: GridSeries) -> Ordering:
    t = f.term(0)
    if t is None:
        return Ordering.EQUAL
    return Ordering(C.sign(t.coeff))


def dominance(a: GridSeries, b: GridSeries) -> DominanceRel:
    """Compare orders of growth; both series must be nonzero."""
    la = leading_term(a)
    lb = leading_term(b)
    r = cmp_monomial(la.monom, lb.monom)
    if r < 0:
        return DominanceRel(Dominance.PREC_STRICT)
    if r > 0:
        return DominanceRel(Dominance.SUCC_STRICT)
    d = sub(a, b)
    t = d.term(0)
    similar = t is None or cmp_monomial(t.monom, la.monom) < 0
    return DominanceRel(Dominance.ASYMP, similar)


def enumerate_terms(f: GridSeries, n: int) -> tuple[list[Term], bool]:
    """First n terms plus a flag: True when the whole support was emitted."""
    out: list[Term] = []
    for i in range(n):
        t = f.term(i)
        if t is None:
            return out, True
        out.append(t)
    return out, f.term(n) is None


def take_status(f: GridSeries, n: int) -> tuple[list[Term], str]:
    """Like :func:`enumerate_terms` but reports budget exhaustion as a
    status ("exhausted" / "more" / "budget") instead of raising."""
    out: list[Term] = []
    try:
        for i in range(n + 1):
            t = f.term(i)
            if t is None:
                return out, "exhausted"
            if i < n:
                out.append(t)
        return out, "more"
    except BudgetExhausted:
        return out, "budget"
