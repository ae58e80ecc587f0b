"""Finite atomic Boolean algebras of conditions.

Every finite complete Boolean algebra is the powerset of its atoms, so a
condition is stored as the frozenset of atom indices it contains.  The zero
condition is the empty set, the unit condition is ``{0, ..., m-1}``.
"""

from __future__ import annotations

from collections.abc import Hashable, Iterable, Iterator, Mapping
from dataclasses import dataclass, field
from itertools import combinations

from condan.errors import AlgebraMismatch, InvalidAssignment

#: Default cap on the number of atoms; raise it with ``Algebra(m, max_atoms=...)``.
MAX_ATOMS = 64


@dataclass(frozen=True)
class Algebra:
    """The powerset algebra of ``{0, ..., atom_count - 1}``."""

    atom_count: int
    max_atoms: int = field(default=MAX_ATOMS, compare=False, repr=False)

    def __post_init__(self):
        if not isinstance(self.atom_count, int) or self.atom_count < 1:
            raise ValueError(f"atom_count must be a positive integer, got {self.atom_count!r}")
        if self.atom_count > self.max_atoms:
            raise ValueError(f"atom_count {self.atom_count} exceeds the cap {self.max_atoms}")

    @property
    def zero(self) -> Condition:
        return Condition(self, frozenset())

    @property
    def one(self) -> Condition:
        return Condition(self, frozenset(range(self.atom_count)))

    def atom(self, i: int) -> Condition:
        return self.condition([i])

    def atoms(self) -> list[Condition]:
        return [self.atom(i) for i in range(self.atom_count)]

    def condition(self, atoms: Iterable[int]) -> Condition:
        return Condition(self, frozenset(atoms))

    def conditions(self) -> Iterator[Condition]:
        """All ``2**m`` conditions, smallest first."""
        for size in range(self.atom_count + 1):
            for combo in combinations(range(self.atom_count), size):
                yield self.condition(combo)

    def join(self, conditions: Iterable[Condition]) -> Condition:
        out = self.zero
        for c in conditions:
            out = out | c
        return out

    def meet(self, conditions: Iterable[Condition]) -> Condition:
        out = self.one
        for c in conditions:
            out = out & c
        return out

    def to_json(self) -> dict:
        return {"atoms": self.atom_count}

    @classmethod
    def from_json(cls, data: Mapping) -> Algebra:
        return cls(int(data["atoms"]))


@dataclass(frozen=True)
class Condition:
    algebra: Algebra
    atoms: frozenset[int]

    def __post_init__(self):
        if not isinstance(self.atoms, frozenset):
            object.__setattr__(self, "atoms", frozenset(self.atoms))
        bad = [a for a in self.atoms if not 0 <= a < self.algebra.atom_count]
        if bad:
            raise ValueError(f"atoms {sorted(bad)} outside 0..{self.algebra.atom_count - 1}")
        object.__setattr__(self, "_order", tuple(sorted(self.atoms)))

    def _check(self, other: Condition) -> None:
        if not isinstance(other, Condition):
            raise TypeError(f"expected a Condition, got {type(other).__name__}")
        if other.algebra != self.algebra:
            raise AlgebraMismatch(
                f"conditions from algebras with {self.algebra.atom_count} and "
                f"{other.algebra.atom_count} atoms"
            )

    def meet(self, other: Condition) -> Condition:
        self._check(other)
        return Condition(self.algebra, self.atoms & other.atoms)

    def join(self, other: Condition) -> Condition:
        self._check(other)
        return Condition(self.algebra, self.atoms | other.atoms)

    def complement(self) -> Condition:
        return Condition(self.algebra, self.algebra.one.atoms - self.atoms)

    def leq(self, other: Condition) -> bool:
        self._check(other)
        return self.atoms <= other.atoms

    __and__ = meet
    __or__ = join
    __invert__ = complement
    __le__ = leq

    def __lt__(self, other: Condition) -> bool:
        return self.leq(other) and self.atoms != other.atoms

    def __ge__(self, other: Condition) -> bool:
        return other.leq(self)

    def __sub__(self, other: Condition) -> Condition:
        return self & ~other

    def __iter__(self) -> Iterator[int]:
        return iter(self._order)

    def __len__(self) -> int:
        return len(self.atoms)

    def __contains__(self, atom: int) -> bool:
        return atom in self.atoms

    @property
    def is_zero(self) -> bool:
        return not self.atoms

    @property
    def is_one(self) -> bool:
        return len(self.atoms) == self.algebra.atom_count

    def __repr__(self) -> str:
        return f"Condition({sorted(self.atoms)})"

    def to_json(self) -> list[int]:
        return sorted(self.atoms)


def condition_ops(x: Condition, y: Condition) -> dict:
    """Meet, join, complement of ``x`` and the order test ``x <= y``."""
    x._check(y)
    return {"meet": x & y, "join": x | y, "complement_of_x": ~x, "leq": x <= y}


class Partition:
    """A family of pairwise disjoint conditions joining to ``owner``.

    Zero blocks are allowed.  The block order given at construction is kept
    (it pairs blocks with the values of a concatenation); equality and
    hashing ignore order and zero blocks.
    """

    __slots__ = ("owner", "blocks")

    def __init__(self, owner: Condition, blocks: Iterable[Condition]):
        blocks = tuple(blocks)
        seen: set[int] = set()
        for b in blocks:
            owner._check(b)
            if seen & b.atoms:
                raise InvalidAssignment(f"blocks overlap on atoms {sorted(seen & b.atoms)}")
            seen |= b.atoms
        if seen != owner.atoms:
            raise InvalidAssignment(
                f"blocks join to {sorted(seen)}, expected owner {sorted(owner.atoms)}"
            )
        self.owner = owner
        self.blocks = blocks

    def canonical(self) -> Partition:
        """Nonzero blocks ordered by their smallest atom."""
        nonzero = [b for b in self.blocks if not b.is_zero]
        return Partition(self.owner, sorted(nonzero, key=lambda b: min(b.atoms)))

    def __eq__(self, other) -> bool:
        if not isinstance(other, Partition):
            return NotImplemented
        return self.owner == other.owner and self._key() == other._key()

    def __hash__(self) -> int:
        return hash((self.owner, self._key()))

    def _key(self) -> frozenset:
        return frozenset(b.atoms for b in self.blocks if not b.is_zero)

    def __len__(self) -> int:
        return len(self.blocks)

    def __iter__(self) -> Iterator[Condition]:
        return iter(self.blocks)

    def __repr__(self) -> str:
        return f"Partition({[sorted(b.atoms) for b in self.blocks]})"

    def refines(self, other: Partition) -> bool:
        return all(any(b <= c for c in other.blocks) for b in self.blocks if not b.is_zero)

    def to_json(self) -> dict:
        return {"owner": self.owner.to_json(), "blocks": [b.to_json() for b in self.blocks]}

    @classmethod
    def from_json(cls, algebra: Algebra, data: Mapping) -> Partition:
        return cls(algebra.condition(data["owner"]), [algebra.condition(b) for b in data["blocks"]])


def make_partition(owner: Condition, assignment: Mapping[int, Hashable]) -> Partition:
    """Partition ``owner`` into the preimages of the labels in ``assignment``."""
    if set(assignment) != set(owner.atoms):
        raise InvalidAssignment(
            f"assignment is defined on {sorted(assignment)}, owner has {sorted(owner.atoms)}"
        )
    groups: dict[Hashable, set[int]] = {}
    for atom in sorted(assignment):
        groups.setdefault(assignment[atom], set()).add(atom)
    blocks = [owner.algebra.condition(g) for g in groups.values()]
    return Partition(owner, blocks).canonical()


def refine_partitions(p: Partition, q: Partition) -> Partition:
    """Common refinement: all nonzero meets of a block of ``p`` with a block of ``q``."""
    if p.owner != q.owner:
        raise InvalidAssignment("partitions have different owners")
    blocks = [a & b for a in p.blocks for b in q.blocks]
    return Partition(p.owner, [b for b in blocks if not b.is_zero]).canonical()


def atom_partition(owner: Condition) -> Partition:
    """The finest partition of ``owner``: one block per atom."""
    return Partition(owner, [owner.algebra.atom(i) for i in owner])
