"""Conditional elements, concatenation, restriction and stable sets.

Over an atomic algebra a conditional element on ``a`` is a step function:
one payload per atom of ``a``.  A stable subset is then exactly a product
of nonempty per-atom payload sets, which is what :class:`StableSet` stores.
"""

from __future__ import annotations

from collections.abc import Callable, Hashable, Iterable, Iterator, Mapping, Sequence
from itertools import product
from types import MappingProxyType
from typing import Any

import numpy as np

from condan.boolean_algebra import Algebra, Condition, Partition
from condan.errors import (
    ConditionMismatch,
    ConditionNotBelow,
    EmptyFamily,
    InvalidAssignment,
    MissingUniverse,
)


def _payload_eq(a, b) -> bool:
    if isinstance(a, np.ndarray) or isinstance(b, np.ndarray):
        a, b = np.asarray(a), np.asarray(b)
        return a.shape == b.shape and bool(np.array_equal(a, b))
    return a == b


class ConditionalValue:
    """A conditional element ``x`` on the condition ``on``.

    ``values`` maps every atom of ``on`` to its payload.  Subclasses coerce
    payloads (see :meth:`_coerce`) and add arithmetic.
    """

    __slots__ = ("on", "_values")

    def __init__(self, on: Condition, values: Mapping[int, Any]):
        if values.keys() != on.atoms:
            raise InvalidAssignment(
                f"values given on atoms {sorted(values)}, condition is {sorted(on.atoms)}"
            )
        self.on = on
        coerce = self._coerce
        self._values = {a: coerce(values[a]) for a in on}

    @staticmethod
    def _coerce(payload):
        return payload

    @property
    def algebra(self) -> Algebra:
        return self.on.algebra

    @property
    def values(self) -> Mapping[int, Any]:
        return MappingProxyType(self._values)

    def __getitem__(self, atom: int):
        return self._values[atom]

    def items(self):
        return self._values.items()

    @classmethod
    def null(cls, algebra: Algebra):
        return cls(algebra.zero, {})

    @classmethod
    def constant(cls, on: Condition, payload):
        return cls(on, {a: payload for a in on})

    @classmethod
    def from_function(cls, on: Condition, fn: Callable[[int], Any]):
        return cls(on, {a: fn(a) for a in on})

    @property
    def is_null(self) -> bool:
        return self.on.is_zero

    def restrict(self, b: Condition):
        return restrict(self, b)

    def _same_on(self, other: ConditionalValue) -> None:
        if self.on != other.on:
            raise ConditionMismatch(f"values live on {self.on} and {other.on}")

    def __eq__(self, other) -> bool:
        if not isinstance(other, ConditionalValue):
            return NotImplemented
        return self.on == other.on and all(
            _payload_eq(self._values[a], other._values[a]) for a in self._values
        )

    def __hash__(self):
        return hash((self.on, tuple(_hashable(v) for v in self._values.values())))

    def __repr__(self) -> str:
        body = ", ".join(f"{a}: {_short(v)}" for a, v in self._values.items())
        return f"{type(self).__name__}({{{body}}})"

    def to_json(self) -> dict:
        return {
            "on": self.on.to_json(),
            "values": {str(a): _jsonable(v) for a, v in self._values.items()},
        }

    @classmethod
    def from_json(cls, algebra: Algebra, data: Mapping):
        on = algebra.condition(data["on"])
        return cls(on, {int(k): v for k, v in data["values"].items()})


def _hashable(v) -> Hashable:
    if isinstance(v, np.ndarray):
        return tuple(v.tolist())
    return v


def _short(v) -> str:
    if isinstance(v, np.ndarray):
        return np.array2string(v, precision=6)
    return repr(v)


def _jsonable(v):
    if isinstance(v, np.ndarray):
        return v.tolist()
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    if isinstance(v, (frozenset, set)):
        return sorted(v)
    return v


def restrict(x: ConditionalValue, b: Condition) -> ConditionalValue:
    """``x|b`` for ``b <= x.on``; ``b = 0`` gives the null value."""
    if not b <= x.on:
        raise ConditionNotBelow(f"{b} is not below {x.on}")
    return type(x)(b, {a: x[a] for a in b})


def concatenate(values: Sequence[ConditionalValue], partition: Partition) -> ConditionalValue:
    """The unique element agreeing with ``values[i]`` on block ``i``.

    Each ``values[i]`` has to be defined on (at least) its block; the result
    lives on ``partition.owner`` and has the type of ``values[0]``.
    """
    if len(values) != len(partition.blocks):
        raise InvalidAssignment(
            f"{len(values)} values for a partition with {len(partition.blocks)} blocks"
        )
    if not values:
        return ConditionalValue.null(partition.owner.algebra)
    out: dict[int, Any] = {}
    for x, block in zip(values, partition.blocks):
        if not block <= x.on:
            raise ConditionNotBelow(f"value on {x.on} cannot be used on block {block}")
        for a in block:
            out[a] = x[a]
    return type(values[0])(partition.owner, out)


def support(x: ConditionalValue, zero) -> Condition:
    """Atoms on which ``x`` differs from the payload ``zero``."""
    return x.algebra.condition(a for a, v in x.items() if not _payload_eq(v, zero))


class StableSet:
    """A stable conditional subset, stored per atom as a nonempty payload set.

    Membership of a conditional element ``y`` on ``b <= on`` means
    ``y[t] in per_atom[t]`` for every atom ``t`` of ``b``.  Payloads must be
    hashable.
    """

    __slots__ = ("on", "_per_atom")

    def __init__(self, on: Condition, per_atom: Mapping[int, Iterable[Hashable]]):
        if set(per_atom) != set(on.atoms):
            raise InvalidAssignment(
                f"per-atom sets given on {sorted(per_atom)}, condition is {sorted(on.atoms)}"
            )
        sets = {a: frozenset(per_atom[a]) for a in sorted(per_atom)}
        empty = [a for a, s in sets.items() if not s]
        if empty:
            raise EmptyFamily(f"empty payload set on atoms {empty}")
        self.on = on
        self._per_atom = sets

    @property
    def algebra(self) -> Algebra:
        return self.on.algebra

    @property
    def per_atom(self) -> Mapping[int, frozenset]:
        return MappingProxyType(self._per_atom)

    def __getitem__(self, atom: int) -> frozenset:
        return self._per_atom[atom]

    @classmethod
    def null(cls, algebra: Algebra) -> StableSet:
        return cls(algebra.zero, {})

    @property
    def is_null(self) -> bool:
        return self.on.is_zero

    def __contains__(self, y: ConditionalValue) -> bool:
        if not y.on <= self.on:
            return False
        return all(y[a] in self._per_atom[a] for a in y.on)

    def members(self, cls: type = ConditionalValue) -> Iterator[ConditionalValue]:
        """Every conditional element of the set on its full condition."""
        atoms = list(self.on)
        for combo in product(*(sorted(self._per_atom[a], key=repr) for a in atoms)):
            yield cls(self.on, dict(zip(atoms, combo)))

    def cardinality(self) -> int:
        n = 1
        for s in self._per_atom.values():
            n *= len(s)
        return n

    def restrict(self, b: Condition) -> StableSet:
        if not b <= self.on:
            raise ConditionNotBelow(f"{b} is not below {self.on}")
        return StableSet(b, {a: self._per_atom[a] for a in b})

    def issubset(self, other: StableSet) -> bool:
        """Conditional inclusion ``self ⊑ other``."""
        return self.on <= other.on and all(
            self._per_atom[a] <= other._per_atom[a] for a in self.on
        )

    __le__ = issubset

    def __eq__(self, other) -> bool:
        if not isinstance(other, StableSet):
            return NotImplemented
        return self.on == other.on and self._per_atom == other._per_atom

    def __hash__(self):
        return hash((self.on, tuple(self._per_atom.items())))

    def __repr__(self) -> str:
        body = ", ".join(f"{a}: {sorted(s, key=repr)}" for a, s in self._per_atom.items())
        return f"StableSet({{{body}}})"

    def union(self, other: StableSet) -> StableSet:
        self.on._check(other.on)
        on = self.on | other.on
        return StableSet(
            on, {a: self._per_atom.get(a, frozenset()) | other._per_atom.get(a, frozenset()) for a in on}
        )

    def intersection(self, other: StableSet) -> StableSet:
        """Per-atom intersection on the largest condition where it is nonempty."""
        self.on._check(other.on)
        sets = {a: self._per_atom[a] & other._per_atom[a] for a in self.on & other.on}
        sets = {a: s for a, s in sets.items() if s}
        return StableSet(self.algebra.condition(sets), sets)

    def complement(self, universe: StableSet | None) -> StableSet:
        if universe is None:
            raise MissingUniverse("the conditional complement needs an ambient universe")
        if not universe.on.is_one:
            raise MissingUniverse("the universe must live on the unit condition")
        if not self <= universe:
            raise ValueError("set is not contained in the universe")
        sets = {a: universe[a] - self._per_atom.get(a, frozenset()) for a in universe.on}
        sets = {a: s for a, s in sets.items() if s}
        return StableSet(self.algebra.condition(sets), sets)

    __or__ = union
    __and__ = intersection

    def select(self, predicate: Callable[[int, Any], bool]) -> StableSet:
        """``[x in self ; predicate]`` for a predicate evaluated atom by atom.

        Returns the null set when no atom has a witness.
        """
        sets = {a: frozenset(p for p in s if predicate(a, p)) for a, s in self._per_atom.items()}
        sets = {a: s for a, s in sets.items() if s}
        return StableSet(self.algebra.condition(sets), sets)

    def to_json(self) -> dict:
        return {
            "on": self.on.to_json(),
            "per_atom": {str(a): [_jsonable(p) for p in sorted(s, key=repr)] for a, s in self._per_atom.items()},
        }

    @classmethod
    def from_json(cls, algebra: Algebra, data: Mapping) -> StableSet:
        def hashable(p):
            return tuple(p) if isinstance(p, list) else p

        on = algebra.condition(data["on"])
        return cls(on, {int(k): [hashable(p) for p in v] for k, v in data["per_atom"].items()})


def set_ops(F: StableSet, G: StableSet, universe: StableSet | None = None) -> dict:
    """Conditional union, intersection and the complement of ``F``."""
    return {
        "union": F.union(G),
        "intersection": F.intersection(G),
        "complement_of_F": F.complement(universe),
    }


def stable_hull(generators: Sequence[ConditionalValue]) -> StableSet:
    """Smallest stable set containing ``generators``.

    Over an atomic algebra this is the per-atom collection of generator
    payloads.
    """
    if not generators:
        raise EmptyFamily("stable hull of an empty family")
    on = generators[0].on
    for g in generators[1:]:
        if g.on != on:
            raise ConditionMismatch(f"generators live on {on} and {g.on}")
    if on.is_zero:
        return StableSet.null(on.algebra)
    return StableSet(on, {a: {_hashable(g[a]) for g in generators} for a in on})
