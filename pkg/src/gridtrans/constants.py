"""Exact real constants: rationals closed under field operations, exp and log.

A :class:`Constant` is an immutable expression DAG kept in a canonical
form at construction time, so structural equality is as strong as we can
cheaply make it:

* sums are flattened rational linear combinations of multiplicative atoms,
* products are exponent maps over atoms, with ``exp(u)*exp(v)`` folded to
  ``exp(u+v)``,
* ``exp(log u) = u`` and ``log(exp u) = u`` always cancel,
* ``log`` of a rational splits over its prime factorisation, so for
  instance ``log(2) + log(3) - log(6)`` collapses to ``0``.

``pi`` is admitted as one extra positive leaf (it is needed to write the
Stirling coefficient ``exp(1/2*log(2*pi))`` exactly); everything else is
built from rationals.

Ordering is decided structurally when possible and otherwise by adaptive
interval refinement (dyadic enclosures via mpmath) with the precision
budget as a ladder; when refinement cannot separate two values the kernel
raises :class:`ZeroTestInconclusive` instead of guessing.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from fractions import Fraction

from mpmath import iv as _iv

from ._rationals import ONE, ZERO, as_integer_ratio, is_rational, rational
from .budget import current_budget
from .errors import DomainError, ZeroTestInconclusive

_RAT = "rat"
_PI = "pi"
_EXP = "exp"
_LOG = "log"
_SUM = "sum"
_PROD = "prod"

_KIND_RANK = {_RAT: 0, _PI: 1, _EXP: 2, _LOG: 3, _PROD: 4, _SUM: 5}


class Constant:
    """Immutable exp-log constant in canonical form.

    Do not call the class directly: use :func:`from_rational`, :data:`PI`
    and the arithmetic helpers / operators, which maintain canonicality.
    """

    __slots__ = ("kind", "value", "parts", "_hash", "_enclosure")

    def __init__(self, kind, value, parts):
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "value", value)
        object.__setattr__(self, "parts", parts)
        object.__setattr__(self, "_hash", None)
        object.__setattr__(self, "_enclosure", None)

    def __setattr__(self, name, value):
        raise AttributeError("Constant is immutable")

    # -- structure ----------------------------------------------------

    def __eq__(self, other):
        if self is other:
            return True
        if not isinstance(other, Constant):
            if is_rational(other):
                return self.kind == _RAT and self.value == other
            return NotImplemented
        if self.kind != other.kind:
            return False
        if hash(self) != hash(other):
            return False
        return self.value == other.value and self.parts == other.parts

    def __hash__(self):
        h = self._hash
        if h is None:
            if self.kind == _RAT:
                h = hash(self.value)
            else:
                h = hash((self.kind, self.value, self.parts))
            object.__setattr__(self, "_hash", h)
        return h

    def sort_key(self):
        return _key(self)

    # -- predicates ---------------------------------------------------

    @property
    def is_rational(self) -> bool:
        return self.kind == _RAT

    @property
    def is_zero(self) -> bool:
        return self.kind == _RAT and self.value == 0

    @property
    def is_one(self) -> bool:
        return self.kind == _RAT and self.value == 1

    def rational_value(self):
        if self.kind != _RAT:
            raise ValueError("not a rational constant")
        return self.value

    # -- arithmetic operators ------------------------------------------

    def __add__(self, other):
        return add(self, _coerce(other))

    __radd__ = __add__

    def __sub__(self, other):
        return sub(self, _coerce(other))

    def __rsub__(self, other):
        return sub(_coerce(other), self)

    def __mul__(self, other):
        return mul(self, _coerce(other))

    __rmul__ = __mul__

    def __truediv__(self, other):
        return div(self, _coerce(other))

    def __rtruediv__(self, other):
        return div(_coerce(other), self)

    def __neg__(self):
        return neg(self)

    def __abs__(self):
        return self if sign(self) >= 0 else neg(self)

    def __repr__(self):
        from .fmt import format_constant

        return f"Constant({format_constant(self)})"


def _coerce(x) -> "Constant":
    if isinstance(x, Constant):
        return x
    if is_rational(x):
        return from_rational(x)
    raise TypeError(f"cannot interpret {x!r} as a Constant")


# ---------------------------------------------------------------------
# constructors


def from_rational(p, q=1) -> Constant:
    return Constant(_RAT, rational(p, q) if q != 1 else rational(p), ())


C_ZERO = from_rational(0)
C_ONE = from_rational(1)
PI = Constant(_PI, None, ())


def _make_sum(rat_part, terms: dict) -> Constant:
    """terms: atom -> nonzero rational coefficient."""
    items = [(a, c) for a, c in terms.items() if c != 0]
    if not items:
        return Constant(_RAT, rat_part, ()) if rat_part != 0 else C_ZERO
    items.sort(key=lambda ac: _key(ac[0]))
    if rat_part == 0 and len(items) == 1 and items[0][1] == ONE:
        return items[0][0]
    return Constant(_SUM, rat_part, tuple(items))


def _make_prod(factors: dict) -> Constant:
    """factors: base -> nonzero integer exponent.  Coefficient-free."""
    exp_arg = C_ZERO
    items = []
    for base, e in factors.items():
        if e == 0:
            continue
        if base.kind == _EXP:
            exp_arg = add(exp_arg, _scale(base.parts[0], rational(e)))
        else:
            items.append((base, e))
    if not exp_arg.is_zero:
        folded = exp(exp_arg)
        if folded.kind == _EXP:
            items.append((folded, 1))
        elif not folded.is_one:
            # exp folding produced a rational or a scaled atom; multiply out
            return mul(folded, _make_prod(dict(items)))
    if not items:
        return C_ONE
    items.sort(key=lambda be: _key(be[0]))
    if len(items) == 1 and items[0][1] == 1:
        return items[0][0]
    return Constant(_PROD, None, tuple(items))


def _as_linear(c: Constant):
    """Decompose into (rational part, {atom: coefficient})."""
    if c.kind == _RAT:
        return c.value, {}
    if c.kind == _SUM:
        return c.value, dict(c.parts)
    return ZERO, {c: ONE}


def _scale(c: Constant, r) -> Constant:
    if r == 0:
        return C_ZERO
    if r == 1:
        return c
    rat_part, terms = _as_linear(c)
    return _make_sum(rat_part * r, {a: cf * r for a, cf in terms.items()})


def add(a: Constant, b: Constant) -> Constant:
    if a.kind == _RAT and b.kind == _RAT:
        return Constant(_RAT, a.value + b.value, ())
    ra, ta = _as_linear(a)
    rb, tb = _as_linear(b)
    merged = dict(ta)
    for atom, cf in tb.items():
        merged[atom] = merged.get(atom, ZERO) + cf
    return _make_sum(ra + rb, merged)


def neg(a: Constant) -> Constant:
    return _scale(a, rational(-1))


def sub(a: Constant, b: Constant) -> Constant:
    return add(a, neg(b))


def _atom_factors(atom: Constant) -> dict:
    if atom.kind == _PROD:
        return dict(atom.parts)
    return {atom: 1}


def _mul_atoms(a: Constant | None, b: Constant | None) -> Constant:
    if a is None:
        return b if b is not None else C_ONE
    if b is None:
        return a
    factors = _atom_factors(a)
    for base, e in _atom_factors(b).items():
        factors[base] = factors.get(base, 0) + e
    return _make_prod(factors)


def mul(a: Constant, b: Constant) -> Constant:
    if a.kind == _RAT and b.kind == _RAT:
        return Constant(_RAT, a.value * b.value, ())
    if a.is_zero or b.is_zero:
        return C_ZERO
    ra, ta = _as_linear(a)
    rb, tb = _as_linear(b)
    acc_rat = ra * rb
    acc: dict = {}

    def _accumulate(piece: Constant, coeff):
        nonlocal acc_rat
        pr, pt = _as_linear(piece)
        acc_rat += pr * coeff
        for atom, cf in pt.items():
            acc[atom] = acc.get(atom, ZERO) + cf * coeff

    for atom, cf in ta.items():
        if rb != 0:
            _accumulate(atom, cf * rb)
    for atom, cf in tb.items():
        if ra != 0:
            _accumulate(atom, cf * ra)
    for aa, ca in ta.items():
        for ab, cb in tb.items():
            _accumulate(_mul_atoms(aa, ab), ca * cb)
    return _make_sum(acc_rat, acc)


def _invert_atom(atom: Constant) -> Constant:
    factors = {base: -e for base, e in _atom_factors(atom).items()}
    return _make_prod(factors)


def div(a: Constant, b: Constant) -> Constant:
    if b.kind == _RAT:
        if b.value == 0:
            raise DomainError("division by zero constant")
        return _scale(a, ONE / b.value)
    rb, tb = _as_linear(b)
    if rb == 0 and len(tb) == 1:
        [(atom, cf)] = tb.items()
        return mul(_scale(a, ONE / cf), _invert_atom(atom))
    # general denominator: must be certifiably nonzero
    s = _certified_sign(b)
    if s == 0:
        raise DomainError("division by zero constant")
    return mul(a, _make_prod({b: -1}))


def exp(a: Constant) -> Constant:
    if a.is_zero:
        return C_ONE
    if a.kind == _LOG:
        return a.parts[0]
    rat_part, terms = _as_linear(a)
    # pull out integer multiples of logs of rationals: exp(k*log(v)) = v^k
    multiplier = ONE
    rest = {}
    for atom, cf in terms.items():
        if (
            atom.kind == _LOG
            and atom.parts[0].kind == _RAT
            and cf.denominator == 1
        ):
            multiplier *= atom.parts[0].value ** int(cf)
        else:
            rest[atom] = cf
    remainder = _make_sum(rat_part, rest)
    if remainder.is_zero:
        return from_rational(multiplier)
    node = Constant(_EXP, None, (remainder,))
    return node if multiplier == 1 else _scale(node, multiplier)


_SMALL_PRIME_BOUND = 100_000
_factor_cache: dict = {}


def _factor_int(n: int) -> dict:
    """Trial-division factorisation; a remaining cofactor above the bound
    stays as a single (possibly composite) factor."""
    if n in _factor_cache:
        return dict(_factor_cache[n])
    m = n
    out: dict = {}
    d = 2
    while d * d <= m and d <= _SMALL_PRIME_BOUND:
        while m % d == 0:
            out[d] = out.get(d, 0) + 1
            m //= d
        d += 1 if d == 2 else 2
    if m > 1:
        out[m] = out.get(m, 0) + 1
    _factor_cache[n] = dict(out)
    return out


def _log_of_rational(v) -> Constant:
    if v <= 0:
        raise DomainError("log of a nonpositive rational")
    if v == 1:
        return C_ZERO
    p, q = as_integer_ratio(v)
    terms: dict = {}
    for n, s in ((p, 1), (q, -1)):
        if n == 1:
            continue
        for f, e in _factor_int(n).items():
            atom = Constant(_LOG, None, (from_rational(f),))
            terms[atom] = terms.get(atom, ZERO) + rational(s * e)
    return _make_sum(ZERO, terms)


def log(a: Constant) -> Constant:
    if a.kind == _RAT:
        return _log_of_rational(a.value)
    if a.kind == _EXP:
        return a.parts[0]
    if a.kind == _PI:
        return Constant(_LOG, None, (a,))
    if a.kind == _PROD:
        if all(_structural_sign(base) == 1 for base, _ in a.parts):
            out = C_ZERO
            for base, e in a.parts:
                out = add(out, _scale(log(base), rational(e)))
            return out
        # fall through: certify the product as a whole
    if a.kind == _SUM:
        rat_part, terms = _as_linear(a)
        if rat_part == 0 and len(terms) == 1:
            [(atom, cf)] = terms.items()
            if cf > 0 and _structural_sign(atom) == 1:
                return add(_log_of_rational(cf), log(atom))
    s = _certified_sign(a)
    if s <= 0:
        raise DomainError("log of a constant that is not positive")
    return Constant(_LOG, None, (a,))


def pow_int(c: Constant, n: int) -> Constant:
    if n == 0:
        return C_ONE
    if c.kind == _RAT:
        if n < 0 and c.value == 0:
            raise DomainError("zero to a negative power")
        return from_rational(c.value**n)
    if n < 0:
        return pow_int(div(C_ONE, c), -n)
    out = C_ONE
    base = c
    while n:
        if n & 1:
            out = mul(out, base)
        base = mul(base, base)
        n >>= 1
    return out


def simplify(c: Constant) -> Constant:
    """Return the canonical form of ``c``.

    Construction already canonicalises eagerly, so this is the identity on
    every reachable value; it exists as the stable name for "the rewrite
    is idempotent" and as an explicit hook should new node kinds appear.
    """
    return c


# ---------------------------------------------------------------------
# ordering and evaluation


def _structural_sign(c: Constant) -> int | None:
    """+1 / -1 / 0 when the sign is evident from the shape, else None."""
    if c.kind == _RAT:
        v = c.value
        return 0 if v == 0 else (1 if v > 0 else -1)
    if c.kind in (_PI, _EXP):
        return 1
    if c.kind == _LOG:
        arg = c.parts[0]
        if arg.kind == _RAT:
            return 1 if arg.value > 1 else (-1 if arg.value < 1 else 0)
        if arg.kind == _PI:
            return 1
        return None
    if c.kind == _PROD:
        s = 1
        for base, e in c.parts:
            bs = _structural_sign(base)
            if bs is None or bs == 0:
                return None
            if bs < 0 and e % 2:
                s = -s
        return s
    if c.kind == _SUM:
        signs = set()
        if c.value != 0:
            signs.add(1 if c.value > 0 else -1)
        for atom, cf in c.parts:
            s = _structural_sign(atom)
            if s is None or s == 0:
                return None
            signs.add(s if cf > 0 else -s)
        if signs == {1}:
            return 1
        if signs == {-1}:
            return -1
        return None
    return None


def _certified_sign(c: Constant) -> int:
    """Sign by structure or interval refinement; raises when inconclusive."""
    if c.kind == _RAT:
        v = c.value
        return 0 if v == 0 else (1 if v > 0 else -1)
    s = _structural_sign(c)
    if s is not None:
        return s
    bits = 64
    limit = current_budget().max_precision
    while True:
        box = eval_interval(c, bits)
        if box.lo > 0:
            return 1
        if box.hi < 0:
            return -1
        if bits >= limit:
            raise ZeroTestInconclusive(
                f"cannot separate constant from zero within {limit} bits"
            )
        bits = min(2 * bits, limit)


def sign(c: Constant) -> int:
    return _certified_sign(c)


def cmp(a: Constant, b: Constant) -> int:
    """-1, 0 or +1; 0 only when a - b collapses structurally to zero."""
    return _certified_sign(sub(a, b))


# ---------------------------------------------------------------------
# dyadic interval enclosures


@dataclass(frozen=True)
class Interval:
    """A closed dyadic interval guaranteed to contain the exact value."""

    lo: Fraction
    hi: Fraction

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    def contains_zero(self) -> bool:
        return self.lo <= 0 <= self.hi

    def intersect(self, other: "Interval") -> "Interval":
        return Interval(max(self.lo, other.lo), min(self.hi, other.hi))

    def __repr__(self):
        return f"Interval({float(self.lo)!r}, {float(self.hi)!r})"


class _RefineNeeded(Exception):
    """Internal: the working precision cannot certify a domain condition."""


_iv_lock = threading.Lock()


def _mpf_to_fraction(raw) -> Fraction:
    sign_bit, man, e, _ = raw
    v = Fraction(int(man)) * Fraction(2) ** int(e)
    return -v if sign_bit else v


def _to_interval(x) -> Interval:
    lo_raw, hi_raw = x._mpi_
    return Interval(_mpf_to_fraction(lo_raw), _mpf_to_fraction(hi_raw))


def _iv_rational(v):
    p, q = as_integer_ratio(v)
    x = _iv.mpf(p)
    return x if q == 1 else x / _iv.mpf(q)


def _iv_eval(c: Constant):
    if c.kind == _RAT:
        return _iv_rational(c.value)
    if c.kind == _PI:
        return +_iv.pi
    if c.kind == _EXP:
        return _iv.exp(_iv_eval(c.parts[0]))
    if c.kind == _LOG:
        arg = _iv_eval(c.parts[0])
        if not arg.a > 0:
            raise _RefineNeeded("log argument not separated from zero")
        return _iv.log(arg)
    if c.kind == _SUM:
        acc = _iv_rational(c.value)
        for atom, cf in c.parts:
            acc += _iv_eval(atom) * _iv_rational(cf)
        return acc
    if c.kind == _PROD:
        acc = _iv.mpf(1)
        for base, e in c.parts:
            b = _iv_eval(base)
            if e < 0 and not (b.a > 0 or b.b < 0):
                raise _RefineNeeded("inverted factor not separated from zero")
            acc *= b ** e
        return acc
    raise AssertionError(c.kind)


def _raw_enclosure(c: Constant, working_bits: int) -> Interval:
    with _iv_lock:
        saved = _iv.prec
        try:
            _iv.prec = working_bits
            return _to_interval(_iv_eval(c))
        finally:
            _iv.prec = saved


def eval_interval(c: Constant, precision: int) -> Interval:
    """Dyadic enclosure of width at most ``2**(1-precision) * max(1, |c|)``.

    Enclosures only ever shrink: results are intersected with the cached
    best enclosure, so a later coarse request can return a tighter
    interval than strictly demanded, never a looser one.
    """
    if precision < 1:
        raise ValueError("precision must be >= 1")
    if c.kind == _RAT and c.value == 0:
        return Interval(Fraction(0), Fraction(0))
    working = precision + 16
    hard_cap = max(4 * (precision + 16), current_budget().max_precision)
    tol = Fraction(2) ** (1 - precision)
    while True:
        try:
            box = _raw_enclosure(c, working)
        except _RefineNeeded:
            box = None
        if box is not None:
            cached = c._enclosure
            if cached is not None:
                box = box.intersect(cached)
            object.__setattr__(c, "_enclosure", box)
            lower_abs = box.lo if box.lo > 0 else (-box.hi if box.hi < 0 else Fraction(0))
            if box.width <= tol * max(Fraction(1), lower_abs):
                return box
        if working >= hard_cap:
            if box is not None:
                return box
            raise DomainError(
                "cannot certify domain conditions within the precision ladder"
            )
        working = min(2 * working, hard_cap)


# ---------------------------------------------------------------------
# deterministic structural ordering key


def _key(c: Constant):
    k = _KIND_RANK[c.kind]
    if c.kind == _RAT:
        p, q = as_integer_ratio(c.value)
        return (k, (p, q), ())
    if c.kind == _PI:
        return (k, (), ())
    if c.kind in (_EXP, _LOG):
        return (k, (), (_key(c.parts[0]),))
    if c.kind == _PROD:
        return (k, (), tuple((_key(b), e, 1) for b, e in c.parts))
    p, q = as_integer_ratio(c.value)
    return (k, (p, q), tuple((_key(a), *as_integer_ratio(cf)) for a, cf in c.parts))
