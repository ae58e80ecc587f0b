"""Conditional naturals and reals, their order, sup/inf and series."""

from __future__ import annotations

import math
import operator
from collections.abc import Callable, Sequence
from typing import Union

import numpy as np

from condan.boolean_algebra import Condition
from condan.core import ConditionalValue, StableSet, support
from condan.errors import ConditionMismatch, EmptyFamily, InsufficientSequence, UncertifiedTail

#: Default relative tolerance for analytic comparisons.
DEFAULT_RTOL = 1e-9
#: Default truncation index for conditional series.
DEFAULT_TRUNCATION = 40


class CondNat(ConditionalValue):
    """Conditional natural number; indices start at 1."""

    __slots__ = ()

    @staticmethod
    def _coerce(payload):
        if isinstance(payload, bool) or int(payload) != payload or payload < 1:
            raise ValueError(f"conditional naturals are integers >= 1, got {payload!r}")
        return int(payload)

    def __lt__(self, other: CondNat) -> bool:
        self._same_on(other)
        return all(self[a] < other[a] for a in self.on)

    def __le__(self, other: CondNat) -> bool:
        self._same_on(other)
        return all(self[a] <= other[a] for a in self.on)

    def __add__(self, other):
        if isinstance(other, int):
            return CondNat(self.on, {a: v + other for a, v in self.items()})
        self._same_on(other)
        return CondNat(self.on, {a: v + other[a] for a, v in self.items()})

    def max(self) -> int:
        return max(self._values.values(), default=0)


class CondReal(ConditionalValue):
    """Conditional real number backed by 64-bit floats.

    Operators act atom by atom; scalars broadcast.
    """

    __slots__ = ()

    @staticmethod
    def _coerce(payload):
        return float(payload)

    def _binary(self, other, op) -> CondReal:
        if isinstance(other, ConditionalValue):
            self._same_on(other)
            return CondReal(self.on, {a: op(v, other[a]) for a, v in self.items()})
        return CondReal(self.on, {a: op(v, other) for a, v in self.items()})

    def __add__(self, other):
        return self._binary(other, operator.add)

    __radd__ = __add__

    def __sub__(self, other):
        return self._binary(other, operator.sub)

    def __rsub__(self, other):
        return self._binary(other, lambda v, w: w - v)

    def __mul__(self, other):
        return self._binary(other, operator.mul)

    __rmul__ = __mul__

    def __truediv__(self, other):
        return self._binary(other, operator.truediv)

    def __pow__(self, p):
        return self._binary(p, operator.pow)

    def __neg__(self):
        return CondReal(self.on, {a: -v for a, v in self.items()})

    def __abs__(self):
        return CondReal(self.on, {a: abs(v) for a, v in self.items()})

    def sqrt(self) -> CondReal:
        return CondReal(self.on, {a: math.sqrt(v) for a, v in self.items()})

    def minimum(self, other) -> CondReal:
        return self._binary(other, min)

    def maximum(self, other) -> CondReal:
        return self._binary(other, max)

    def is_positive(self) -> bool:
        """Membership in R^{++}."""
        return all(v > 0 for v in self._values.values())

    def is_nonnegative(self) -> bool:
        return all(v >= 0 for v in self._values.values())

    def max(self) -> float:
        return max(self._values.values(), default=-math.inf)

    def min(self) -> float:
        return min(self._values.values(), default=math.inf)


Scalar = Union[float, int]

_ARITH: dict[str, Callable] = {
    "+": operator.add,
    "-": operator.sub,
    "*": operator.mul,
    "×": operator.mul,
    "−": operator.sub,
    "min": min,
    "max": max,
}


def arith(x: CondReal, y: CondReal | None, op: str) -> CondReal:
    """Per-atom field operation ``op`` in ``+ - * abs min max``."""
    if op == "abs":
        return abs(x)
    if op not in _ARITH:
        raise ValueError(f"unknown operation {op!r}")
    if y is None:
        raise ValueError(f"operation {op!r} needs two operands")
    if x.on != y.on:
        raise ConditionMismatch(f"operands live on {x.on} and {y.on}")
    return x._binary(y, _ARITH[op])


def compare(x: CondReal, y: CondReal) -> dict:
    """Conditions where ``x <= y`` and ``x < y``, and whether each holds on ``x.on``."""
    if x.on != y.on:
        raise ConditionMismatch(f"operands live on {x.on} and {y.on}")
    alg = x.algebra
    leq = alg.condition(a for a in x.on if x[a] <= y[a])
    lt = alg.condition(a for a in x.on if x[a] < y[a])
    return {"leq_condition": leq, "lt_condition": lt, "leq": leq == x.on, "lt": lt == x.on}


def cond_inverse(r: CondReal) -> CondReal:
    """Reciprocal on ``supp(r)`` and zero off it."""
    return CondReal(r.on, {a: (1.0 / v if v != 0 else 0.0) for a, v in r.items()})


def indicator(c: Condition, on: Condition | None = None) -> CondReal:
    """The conditional real equal to 1 on ``c`` and 0 elsewhere on ``on``."""
    on = c.algebra.one if on is None else on
    return CondReal(on, {a: 1.0 if a in c else 0.0 for a in on})


def sup_inf(F: StableSet) -> dict:
    """Conditional supremum and infimum of a finite stable set of reals."""
    if F.on.is_zero:
        raise EmptyFamily("sup/inf of the null set")
    return {
        "sup": CondReal(F.on, {a: max(F[a]) for a in F.on}),
        "inf": CondReal(F.on, {a: min(F[a]) for a in F.on}),
    }


Stream = Union[Sequence[CondReal], Callable[[int], CondReal]]


def term(seq, k: int):
    """The ``k``-th term (``k >= 1``) of a list or of a callable stream."""
    if k < 1:
        raise ValueError("sequence indices start at 1")
    if callable(seq):
        return seq(k)
    try:
        return seq[k - 1]
    except IndexError:
        raise InsufficientSequence(f"sequence has {len(seq)} terms, term {k} requested") from None


def partial_sum(seq: Stream, n: CondNat) -> CondReal:
    """``sum_{1 <= k <= n} seq[k]`` with a conditional upper index ``n``."""
    top = n.max()
    running = {a: 0.0 for a in n.on}
    for k in range(1, top + 1):
        t = term(seq, k)
        for a in n.on:
            if k <= n[a]:
                running[a] += t[a]
    return CondReal(n.on, running)


def series_limit(
    seq: Stream,
    truncation: int = DEFAULT_TRUNCATION,
    tail_bound: CondReal | Scalar | None = None,
) -> CondReal:
    """Truncated conditional series; absolute error at most ``tail_bound`` per atom.

    Convergence is never assumed, the caller certifies the tail beyond
    ``truncation``.
    """
    if tail_bound is None:
        raise UncertifiedTail("series_limit needs a certified tail bound")
    first = term(seq, 1)
    if isinstance(tail_bound, ConditionalValue):
        if not tail_bound.is_nonnegative():
            raise UncertifiedTail("tail bound must be nonnegative")
    elif tail_bound < 0:
        raise UncertifiedTail("tail bound must be nonnegative")
    top = CondNat.constant(first.on, truncation)
    return partial_sum(seq, top)


def cauchy_schwarz_eval(
    a: Stream,
    b: Stream,
    truncation: int = DEFAULT_TRUNCATION,
    tail_a: CondReal | Scalar | None = None,
    tail_b: CondReal | Scalar | None = None,
    tol: float = 1e-12,
) -> dict:
    """Evaluate both sides of the conditional Cauchy-Schwarz inequality.

    ``tail_a``/``tail_b`` bound the tails of ``sum a_k**2`` and ``sum b_k**2``
    beyond ``truncation``; the tail of ``sum a_k b_k`` is bounded by their
    geometric mean.  ``holds`` uses a relative slack ``tol``.
    """
    if tail_a is None or tail_b is None:
        raise UncertifiedTail("cauchy_schwarz_eval needs tail bounds for both series")
    for t in (tail_a, tail_b):
        ok = t.is_nonnegative() if isinstance(t, ConditionalValue) else t >= 0
        if not ok:
            raise UncertifiedTail("tail bounds must be nonnegative")
    first = term(a, 1)
    atoms = list(first.on)

    def table(seq):
        rows = (term(seq, k) for k in range(1, truncation + 1))
        return np.array([[x[t] for t in atoms] for x in rows]).reshape(truncation, len(atoms))

    A, B = table(a), table(b)
    saa, sbb, sab = (A * A).sum(axis=0), (B * B).sum(axis=0), (A * B).sum(axis=0)
    lhs = CondReal(first.on, dict(zip(atoms, (sab * sab).tolist())))
    rhs = CondReal(first.on, dict(zip(atoms, (saa * sbb).tolist())))
    alg = lhs.algebra
    holds_on = alg.condition(t for t in lhs.on if lhs[t] <= rhs[t] + tol * max(1.0, abs(rhs[t])))
    return {"lhs": lhs, "rhs": rhs, "holds_condition": holds_on, "holds": holds_on == lhs.on}


__all__ = [
    "CondNat",
    "CondReal",
    "arith",
    "compare",
    "cond_inverse",
    "indicator",
    "sup_inf",
    "partial_sum",
    "series_limit",
    "cauchy_schwarz_eval",
    "support",
    "term",
]
