"""Lazy, memoized streams of series terms.

Every series holds one :class:`TermStream`: a strictly-decreasing,
zero-free sequence of terms computed on demand and memoized, safe to read
from several threads.  The combinators here (k-way merge, frontier
product, sums of streams with decreasing leading bounds) are where the
kernel's exactness lives: a term is emitted only once no later candidate
can change it.

Budgets: finding the next term may process at most ``max_terms`` candidate
monomials (a "candidate" is one merge step, one frontier pop, or one
sub-stream opening).  Beyond that the stream raises
:class:`BudgetExhausted` and stays poisoned, so an identical request
fails identically instead of silently looking exhausted.
"""

from __future__ import annotations

import heapq
import threading
from typing import Callable, Iterable, Iterator

from . import constants as C
from .budget import current_budget
from .errors import BudgetExhausted, InvariantViolation, KernelError
from .monomials import Term, TransMonomial, cmp_monomial, mul_monomial


class TermStream:
    """Memoized strictly-decreasing term stream."""

    __slots__ = ("_terms", "_gen", "_done", "_error", "_lock")

    def __init__(self, gen: Iterator[Term] | None):
        self._terms: list[Term] = []
        self._gen = gen
        self._done = gen is None
        self._error: KernelError | None = None
        self._lock = threading.RLock()

    @classmethod
    def from_terms(cls, terms: Iterable[Term]) -> "TermStream":
        s = cls(None)
        prev = None
        for t in terms:
            if t.coeff.is_zero:
                raise InvariantViolation("zero coefficient in explicit terms")
            if prev is not None and cmp_monomial(prev, t.monom) <= 0:
                raise InvariantViolation("explicit terms not strictly decreasing")
            prev = t.monom
            s._terms.append(t)
        return s

    def term(self, i: int) -> Term | None:
        """The i-th term, or None when the stream has ended before it."""
        while True:
            with self._lock:
                if i < len(self._terms):
                    return self._terms[i]
                if self._error is not None:
                    raise self._error
                if self._done:
                    return None
                try:
                    t = next(self._gen)
                except StopIteration:
                    self._done = True
                    self._gen = None
                    continue
                except KernelError as e:
                    self._error = e
                    self._gen = None
                    raise
                if t.coeff.is_zero:
                    self._error = InvariantViolation("stream emitted a zero term")
                    raise self._error
                if self._terms and cmp_monomial(self._terms[-1].monom, t.monom) <= 0:
                    self._error = InvariantViolation(
                        "stream emitted terms out of order"
                    )
                    raise self._error
                self._terms.append(t)

    def known_terms(self) -> tuple[Term, ...]:
        """Snapshot of the prefix materialized so far (no new work)."""
        with self._lock:
            return tuple(self._terms)

    def iter_terms(self) -> Iterator[Term]:
        i = 0
        while True:
            t = self.term(i)
            if t is None:
                return
            yield t
            i += 1


EMPTY_STREAM = TermStream(None)


class _Work:
    """Per-emission candidate counter against the ambient budget."""

    __slots__ = ("count", "limit")

    def __init__(self):
        self.count = 0
        self.limit = current_budget().max_terms

    def step(self, n: int = 1):
        self.count += n
        if self.count > self.limit:
            raise BudgetExhausted(
                f"processed more than {self.limit} candidate terms "
                "without settling the next one (deep cancellation?)"
            )

    def emitted(self):
        self.count = 0
        self.limit = current_budget().max_terms


def merge_gen(streams: tuple[TermStream, ...]) -> Iterator[Term]:
    """Sum of finitely many streams."""
    pos = [0] * len(streams)
    work = _Work()
    while True:
        best: TransMonomial | None = None
        best_ks: list[int] = []
        for k, s in enumerate(streams):
            t = s.term(pos[k])
            if t is None:
                continue
            if best is None:
                best, best_ks = t.monom, [k]
            else:
                r = cmp_monomial(t.monom, best)
                if r > 0:
                    best, best_ks = t.monom, [k]
                elif r == 0:
                    best_ks.append(k)
        if best is None:
            return
        coeff = C.C_ZERO
        for k in best_ks:
            coeff = C.add(coeff, streams[k].term(pos[k]).coeff)
            pos[k] += 1
        work.step()
        if not coeff.is_zero:
            yield Term(coeff, best)
            work.emitted()


class _RevMono:
    """Max-heap adapter for monomials under heapq."""

    __slots__ = ("m",)

    def __init__(self, m: TransMonomial):
        self.m = m

    def __lt__(self, other: "_RevMono"):
        return cmp_monomial(self.m, other.m) > 0


def product_gen(fs: TermStream, gs: TermStream) -> Iterator[Term]:
    """Cauchy product via a frontier heap over index pairs.

    Whenever a pair (i, j) is popped, its successors enter the heap, so
    every pair whose product monomial equals the current maximum is
    already present; coefficients for equal monomials are accumulated
    before emission.
    """
    if fs.term(0) is None or gs.term(0) is None:
        return
    heap: list[tuple[_RevMono, int, int]] = []
    pushed: set[tuple[int, int]] = set()

    def push(i: int, j: int):
        if (i, j) in pushed:
            return
        tf, tg = fs.term(i), gs.term(j)
        if tf is None or tg is None:
            return
        heapq.heappush(heap, (_RevMono(mul_monomial(tf.monom, tg.monom)), i, j))
        pushed.add((i, j))

    push(0, 0)
    work = _Work()
    while heap:
        top = heap[0][0].m
        coeff = C.C_ZERO
        while heap and cmp_monomial(heap[0][0].m, top) == 0:
            _, i, j = heapq.heappop(heap)
            pushed.discard((i, j))
            coeff = C.add(coeff, C.mul(fs.term(i).coeff, gs.term(j).coeff))
            push(i + 1, j)
            push(i, j + 1)
            work.step()
        if not coeff.is_zero:
            yield Term(coeff, top)
            work.emitted()


def scale_gen(src: TermStream, coeff: C.Constant, monom: TransMonomial) -> Iterator[Term]:
    """Multiply a stream by one term.  Order is preserved because monomial
    multiplication is order-compatible."""
    for t in src.iter_terms():
        c = C.mul(coeff, t.coeff)
        if not c.is_zero:
            yield Term(c, mul_monomial(monom, t.monom))


SumPart = tuple[TransMonomial, Callable[[], TermStream]]


def big_sum_gen(parts: Iterator[SumPart]) -> Iterator[Term]:
    """Sum of a (possibly unbounded) sequence of streams.

    Each part comes with an upper-bound monomial for all of its terms and
    the bounds must strictly decrease along the sequence; then a term can
    be emitted as soon as every still-unopened part is bounded strictly
    below it.  With exact leading bounds at most one extra part is opened
    per emitted term.
    """
    cursors: list[list] = []  # [stream, index]
    pending = next(parts, None)
    last_bound: TransMonomial | None = None
    work = _Work()
    while True:
        while True:
            cursors = [cur for cur in cursors if cur[0].term(cur[1]) is not None]
            best: TransMonomial | None = None
            for cur in cursors:
                t = cur[0].term(cur[1])
                if best is None or cmp_monomial(t.monom, best) > 0:
                    best = t.monom
            if pending is None:
                break
            bound, thunk = pending
            if last_bound is not None and cmp_monomial(last_bound, bound) <= 0:
                raise InvariantViolation("sum part bounds must strictly decrease")
            if best is not None and cmp_monomial(bound, best) < 0:
                break
            stream = thunk()
            last_bound = bound
            pending = next(parts, None)
            work.step()
            if stream.term(0) is not None:
                if cmp_monomial(stream.term(0).monom, bound) > 0:
                    raise InvariantViolation("sum part exceeds its stated bound")
                cursors.append([stream, 0])
        if best is None:
            return
        coeff = C.C_ZERO
        for cur in cursors:
            t = cur[0].term(cur[1])
            if t is not None and cmp_monomial(t.monom, best) == 0:
                coeff = C.add(coeff, t.coeff)
                cur[1] += 1
        work.step()
        if not coeff.is_zero:
            yield Term(coeff, best)
            work.emitted()


def suffix_gen(src: TermStream, start: int) -> Iterator[Term]:
    i = start
    while True:
        t = src.term(i)
        if t is None:
            return
        yield t
        i += 1
