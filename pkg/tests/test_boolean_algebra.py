import itertools

import pytest
from hypothesis import given
from hypothesis import strategies as st

from condan.boolean_algebra import (
    Algebra,
    Partition,
    atom_partition,
    condition_ops,
    make_partition,
    refine_partitions,
)
from condan.errors import AlgebraMismatch, InvalidAssignment


def test_condition_ops_example():
    alg = Algebra(3)
    out = condition_ops(alg.condition({0, 1}), alg.condition({1, 2}))
    assert out["meet"] == alg.condition({1})
    assert out["join"] == alg.one
    assert out["complement_of_x"] == alg.condition({2})
    assert out["leq"] is False


def test_zero_and_one():
    alg = Algebra(3)
    out = condition_ops(alg.zero, alg.condition({2}))
    assert out["meet"].is_zero and out["leq"]
    assert ~alg.one == alg.zero
    assert ~alg.zero == alg.one


def test_algebra_mismatch():
    with pytest.raises(AlgebraMismatch):
        Algebra(2).one & Algebra(3).one


@pytest.mark.parametrize("m", [0, -1])
def test_invalid_atom_count(m):
    with pytest.raises(ValueError):
        Algebra(m)


def test_atom_out_of_range():
    with pytest.raises(ValueError):
        Algebra(2).condition({2})


def test_make_partition_examples():
    alg = Algebra(3)
    p = make_partition(alg.one, {0: "A", 1: "A", 2: "B"})
    assert [b.to_json() for b in p.blocks] == [[0, 1], [2]]
    q = make_partition(Algebra(1).one, {0: "A"})
    assert [b.to_json() for b in q.blocks] == [[0]]
    z = make_partition(alg.zero, {})
    assert z.blocks == ()


def test_make_partition_needs_full_assignment():
    alg = Algebra(3)
    with pytest.raises(InvalidAssignment):
        make_partition(alg.one, {0: "A", 1: "B"})


def test_partition_validation():
    alg = Algebra(3)
    with pytest.raises(InvalidAssignment):
        Partition(alg.one, [alg.condition({0, 1}), alg.condition({1, 2})])
    with pytest.raises(InvalidAssignment):
        Partition(alg.one, [alg.condition({0})])
    # zero blocks are allowed and ignored by equality
    p = Partition(alg.one, [alg.one, alg.zero])
    assert p == Partition(alg.one, [alg.one])


def test_refine_examples():
    alg = Algebra(3)
    c = alg.condition
    p = Partition(alg.one, [c({0, 1}), c({2})])
    q = Partition(alg.one, [c({0}), c({1, 2})])
    assert refine_partitions(p, q) == atom_partition(alg.one)
    assert refine_partitions(p, p) == p
    top = Partition(alg.one, [alg.one])
    assert refine_partitions(top, atom_partition(alg.one)) == atom_partition(alg.one)


def test_json_roundtrip():
    alg = Algebra(4)
    p = make_partition(alg.one, {0: 1, 1: 0, 2: 1, 3: 2})
    assert Partition.from_json(alg, p.to_json()) == p
    assert Algebra.from_json(alg.to_json()) == alg


def test_lattice_laws_exhaustive():
    alg = Algebra(3)
    conds = list(alg.conditions())
    assert len(conds) == 8
    for x, y, z in itertools.product(conds, repeat=3):
        assert (x & y) & z == x & (y & z)
        assert (x | y) | z == x | (y | z)
        assert x & (y | z) == (x & y) | (x & z)
        assert x | (y & z) == (x | y) & (x | z)
        assert ~(x | y) == ~x & ~y
        assert ~(x & y) == ~x | ~y
    for x in conds:
        assert ~~x == x
        assert x == alg.join(alg.atom(i) for i in x)


conditions16 = st.builds(lambda s: Algebra(16).condition(s), st.sets(st.integers(0, 15)))


@given(conditions16, conditions16, conditions16)
def test_lattice_laws_random(x, y, z):
    assert x & y == y & x and x | y == y | x
    assert x & (y | z) == (x & y) | (x & z)
    assert ~(x & y) == ~x | ~y
    assert (x <= y) == ((x & y) == x)


@given(st.integers(1, 6).flatmap(lambda m: st.tuples(
    st.just(m), st.lists(st.integers(0, 3), min_size=m, max_size=m), st.lists(st.integers(0, 3), min_size=m, max_size=m)
)))
def test_refinement_refines_both(args):
    m, lp, lq = args
    alg = Algebra(m)
    p = make_partition(alg.one, dict(enumerate(lp)))
    q = make_partition(alg.one, dict(enumerate(lq)))
    r = refine_partitions(p, q)
    assert r.refines(p) and r.refines(q)
