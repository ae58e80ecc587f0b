import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from condan.boolean_algebra import Algebra, Partition
from condan.core import ConditionalValue, StableSet, concatenate, stable_hull, support
from condan.errors import ConditionMismatch, EmptyFamily, InsufficientSequence, UncertifiedTail
from condan.harness import concatenation_closure
from condan.numbers import (
    CondNat,
    CondReal,
    arith,
    cauchy_schwarz_eval,
    compare,
    cond_inverse,
    indicator,
    partial_sum,
    series_limit,
    sup_inf,
)

ALG = Algebra(2)


def r(*vals):
    return CondReal(ALG.one, dict(enumerate(vals)))


def test_arith_examples():
    assert arith(r(1, 2), r(3, 4), "+") == r(4, 6)
    assert arith(r(-3, 5), None, "abs") == r(3, 5)
    assert arith(r(1, 5), r(3, 2), "max") == r(3, 5)
    assert arith(r(1, 5), r(3, 2), "min") == r(1, 2)
    assert arith(r(1, 5), r(3, 2), "×") == r(3, 10)


def test_arith_errors():
    with pytest.raises(ValueError):
        arith(r(1, 2), r(1, 2), "^")
    with pytest.raises(ConditionMismatch):
        arith(r(1, 2), CondReal(ALG.atom(0), {0: 1.0}), "+")


def test_compare_examples():
    out = compare(r(1, 5), r(2, 3))
    assert out["leq_condition"] == ALG.atom(0) and out["leq"] is False
    same = compare(r(1, 5), r(1, 5))
    assert same["leq"] and same["lt_condition"].is_zero
    assert compare(r(0, 0), r(1, 1))["lt"]


def test_cond_inverse_examples():
    assert cond_inverse(r(2, 0)) == r(0.5, 0)
    assert cond_inverse(r(1, 1)) == r(1, 1)
    assert cond_inverse(r(-4, 0.5)) == r(-0.25, 2)


def test_sup_inf_examples():
    hull = stable_hull([r(1, 5), r(3, 2)])
    out = sup_inf(hull)
    assert out["sup"] == r(3, 5) and out["inf"] == r(1, 2)
    single = sup_inf(stable_hull([r(4, -1)]))
    assert single["sup"] == single["inf"] == r(4, -1)
    F = StableSet(ALG.one, {0: {0.0, 1.0}, 1: {-1.0, 0.0}})
    assert sup_inf(F)["sup"] == r(1, 0)
    with pytest.raises(EmptyFamily):
        sup_inf(StableSet.null(ALG))


def test_partial_sum_examples():
    seq = [CondReal.constant(ALG.one, k) for k in range(1, 11)]
    assert partial_sum(seq, CondNat(ALG.one, {0: 2, 1: 3})) == r(3, 6)
    assert partial_sum(seq, CondNat.constant(ALG.one, 1)) == seq[0]
    geo = lambda k: CondReal.constant(ALG.one, 2.0**-k)  # noqa: E731
    out = partial_sum(geo, CondNat.constant(ALG.one, 10))
    assert out == r(1 - 2**-10, 1 - 2**-10)


def test_partial_sum_short_list():
    seq = [CondReal.constant(ALG.one, 1.0)]
    with pytest.raises(InsufficientSequence):
        partial_sum(seq, CondNat.constant(ALG.one, 2))


def test_condnat_rejects_zero():
    with pytest.raises(ValueError):
        CondNat.constant(ALG.one, 0)


def test_series_limit_examples():
    four = lambda k: CondReal.constant(ALG.one, 4.0**-k)  # noqa: E731
    out = series_limit(four, 40, 4.0**-40)
    assert all(abs(out[a] - 1 / 3) < 4.0**-40 + 1e-16 for a in out.on)
    zero = lambda k: CondReal.constant(ALG.one, 0.0)  # noqa: E731
    assert series_limit(zero, 40, 0.0) == r(0, 0)
    two = lambda k: CondReal.constant(ALG.one, 2.0**-k)  # noqa: E731
    out = series_limit(two, 40, 2.0**-40)
    assert all(abs(out[a] - 1.0) <= 2.0**-40 for a in out.on)
    with pytest.raises(UncertifiedTail):
        series_limit(two, 40)
    with pytest.raises(UncertifiedTail):
        series_limit(two, 40, -1.0)


def test_cauchy_schwarz_examples():
    geo = lambda k: CondReal.constant(ALG.one, 2.0**-k)  # noqa: E731
    out = cauchy_schwarz_eval(geo, geo, 40, 4.0**-40, 4.0**-40)
    for a in ALG.one:
        assert out["lhs"][a] == pytest.approx(1 / 9, abs=1e-12)
        assert out["rhs"][a] == pytest.approx(1 / 9, abs=1e-12)
    assert out["holds"]
    e1 = lambda k: CondReal.constant(ALG.one, float(k == 1))  # noqa: E731
    e2 = lambda k: CondReal.constant(ALG.one, float(k == 2))  # noqa: E731
    orth = cauchy_schwarz_eval(e1, e2, 5, 0.0, 0.0)
    assert orth["lhs"] == r(0, 0) and orth["rhs"] == r(1, 1) and orth["holds"]
    with pytest.raises(UncertifiedTail):
        cauchy_schwarz_eval(e1, e2, 5)


reals = st.floats(-1e6, 1e6, allow_nan=False, allow_subnormal=False)


@given(st.lists(reals, min_size=3, max_size=3))
def test_inverse_times_value_is_support_indicator(vals):
    alg = Algebra(3)
    x = CondReal(alg.one, dict(enumerate(vals)))
    prod = x * cond_inverse(x)
    ind = indicator(support(x, 0.0))
    for a in alg.one:
        assert abs(prod[a] - ind[a]) <= 1e-15


@given(st.lists(reals, min_size=3, max_size=3), st.lists(reals, min_size=3, max_size=3))
def test_order_is_per_atom(xs, ys):
    alg = Algebra(3)
    x, y = CondReal(alg.one, dict(enumerate(xs))), CondReal(alg.one, dict(enumerate(ys)))
    out = compare(x, y)
    assert out["leq_condition"] == alg.condition(a for a in range(3) if xs[a] <= ys[a])
    assert out["leq"] == all(a <= b for a, b in zip(xs, ys))
    assert (x.maximum(y) - x.minimum(y)).is_nonnegative()


@given(
    st.lists(st.lists(reals, min_size=3, max_size=3), min_size=8, max_size=8),
    st.lists(st.integers(1, 8), min_size=3, max_size=3),
    st.lists(st.integers(1, 8), min_size=3, max_size=3),
    st.lists(st.booleans(), min_size=3, max_size=3),
)
def test_partial_sum_respects_concatenation(rows, n1, n2, mask):
    alg = Algebra(3)
    seq = [CondReal(alg.one, dict(enumerate(row))) for row in rows]
    N1, N2 = CondNat(alg.one, dict(enumerate(n1))), CondNat(alg.one, dict(enumerate(n2)))
    b = alg.condition(i for i, f in enumerate(mask) if f)
    p = Partition(alg.one, [b, ~b])
    lhs = partial_sum(seq, concatenate([N1, N2], p))
    rhs = concatenate([partial_sum(seq, N1), partial_sum(seq, N2)], p)
    assert lhs == rhs


@given(st.integers(1, 3).flatmap(lambda m: st.lists(
    st.lists(st.integers(-3, 3), min_size=m, max_size=m), min_size=1, max_size=3
)))
def test_sup_matches_closure(rows):
    alg = Algebra(len(rows[0]))
    gens = [CondReal(alg.one, dict(enumerate(map(float, row)))) for row in rows]
    out = sup_inf(stable_hull(gens))
    closure = concatenation_closure(gens)
    for i, a in enumerate(alg.one):
        assert out["sup"][a] == max(m[i] for m in closure)
        assert out["inf"][a] == min(m[i] for m in closure)


@given(st.lists(st.lists(reals, min_size=2, max_size=2), min_size=1, max_size=20),
       st.lists(st.lists(reals, min_size=2, max_size=2), min_size=20, max_size=20))
def test_cauchy_schwarz_holds(a_rows, b_rows):
    n = len(a_rows)
    a = [CondReal(ALG.one, dict(enumerate(row))) for row in a_rows]
    b = [CondReal(ALG.one, dict(enumerate(row))) for row in b_rows[:n]]
    assert cauchy_schwarz_eval(a, b, n, 0.0, 0.0)["holds"]


def test_cauchy_schwarz_matches_numpy(rng):
    A, B = rng.standard_normal((30, 2)), rng.standard_normal((30, 2))
    a = [CondReal(ALG.one, dict(enumerate(row))) for row in A]
    b = [CondReal(ALG.one, dict(enumerate(row))) for row in B]
    out = cauchy_schwarz_eval(a, b, 30, 0.0, 0.0)
    expect_lhs = np.einsum("ka,ka->a", A, B) ** 2
    expect_rhs = (A**2).sum(0) * (B**2).sum(0)
    for i in range(2):
        assert math.isclose(out["lhs"][i], expect_lhs[i], rel_tol=1e-12)
        assert math.isclose(out["rhs"][i], expect_rhs[i], rel_tol=1e-12)


def test_condreal_json_roundtrip():
    x = r(1.5, -2.0)
    assert CondReal.from_json(ALG, x.to_json()) == x
    assert ConditionalValue.from_json(ALG, x.to_json()) == x
