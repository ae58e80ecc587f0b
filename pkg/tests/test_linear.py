import itertools
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays
from scipy.optimize import linprog

from condan.boolean_algebra import Algebra, Partition
from condan.errors import GridMismatch, NotBounded, NotInjective, UncertifiedTail, UnsupportedNormKind
from condan.linear import (
    CondLinearMap,
    CondNorm,
    CondVector,
    RenormBody,
    SymmetricBody,
    banach_disk_constants,
    body_inclusion,
    concatenate_maps,
    direct_sum_l2,
    direction_grid,
    double_dual_norm,
    embedding_check,
    equivalence_constants,
    functional_norm,
    gauge,
    goldstine_check,
    half_norming_set,
    half_norming_value,
    lp_norm,
    minkowski_combine,
    norming_functional,
    operator_norm,
    renorm_sequence,
    sampled_operator_norm,
    spectral_norm,
    sphere_net,
    support_function,
)
from condan.numbers import CondReal

ALG1 = Algebra(1)
ALG2 = Algebra(2)

# sum_n (2^n + 2^-n)^-2 and its square root, from exact rational summation
REF_SUM = 0.23568721276519742
REF_NORM = 0.48547627415271018


def vec(alg, *rows):
    return CondVector(alg.one, {a: np.asarray(r, float) for a, r in enumerate(rows)})


def test_gauge_example():
    C = SymmetricBody(ALG1.one, {0: (np.eye(2), [1.0, 2.0])})
    assert gauge(C, vec(ALG1, [3, 2]))[0] == 3.0
    assert gauge(C, vec(ALG1, [0, 0]))[0] == 0.0


def test_gauge_homogeneity_example():
    C = SymmetricBody.box(ALG2.one, 2)
    x = vec(ALG2, [1, -2], [0.5, 3])
    r = CondReal(ALG2.one, {0: -2.0, 1: 0.5})
    g, gr = gauge(C, x), gauge(C, x * r)
    assert gr[0] == 2 * g[0] and gr[1] == 0.5 * g[1]


def test_support_and_minkowski_example():
    grids = {0: direction_grid(2)}
    K = SymmetricBody.box(ALG1.one, 2, grids=grids)
    B = SymmetricBody.euclidean(ALG1.one, 2, grids=grids)
    S = minkowski_combine(2.0, K, 0.5, B)
    e1 = vec(ALG1, [1, 0])
    assert support_function(K, e1)[0] == pytest.approx(1.0)
    assert support_function(B, e1)[0] == pytest.approx(1.0)
    assert support_function(S, e1)[0] == pytest.approx(2.5)
    same = minkowski_combine(1.0, K, 0.0, B)
    np.testing.assert_allclose(same.grid_support(0), K.grid_support(0))


def test_minkowski_needs_common_grid():
    K = SymmetricBody.box(ALG1.one, 2)
    B = SymmetricBody.euclidean(ALG1.one, 2)
    with pytest.raises(GridMismatch):
        minkowski_combine(1.0, K, 1.0, B)


def test_body_inclusion_examples():
    A = SymmetricBody.box(ALG2.one, 2)
    assert body_inclusion(A, A.scaled(2.0))["included_condition"] == ALG2.one
    assert body_inclusion(A.scaled(2.0), A)["included_condition"].is_zero
    mixed = SymmetricBody.box(ALG2.one, 2, radius=CondReal(ALG2.one, {0: 0.5, 1: 3.0}))
    assert body_inclusion(mixed, A)["included_condition"] == ALG2.atom(0)


def test_vertices_match_lp_support(rng):
    for _ in range(20):
        d = int(rng.integers(1, 5))
        U = np.vstack([np.eye(d), rng.standard_normal((5, d))])
        c = rng.uniform(0.5, 2, len(U))
        C = SymmetricBody(ALG1.one, {0: (U, c)})
        V = C.vertices(0)
        assert np.all(C.atom_gauge(0, V) <= 1 + 1e-9)
        u = rng.standard_normal(d)
        res = linprog(-u, A_ub=np.vstack([U, -U]), b_ub=np.r_[c, c], bounds=[(None, None)] * d, method="highs")
        assert float((V @ u).max()) == pytest.approx(-res.fun, rel=1e-9, abs=1e-12)


def test_slab_has_no_vertices():
    slab = SymmetricBody(ALG1.one, {0: (np.array([[1.0, 0.0]]), [1.0])})
    assert slab.bounded_condition().is_zero
    with pytest.raises(NotBounded):
        slab.vertices(0)


def test_operator_norm_examples():
    for kind in ("l1", "l2", "linf"):
        I = CondLinearMap(ALG1.one, {0: np.eye(3)}, CondNorm(kind), CondNorm(kind))
        assert operator_norm(I)[0] == pytest.approx(1.0, abs=1e-12)
    D = CondLinearMap(ALG1.one, {0: np.diag([3.0, 5.0])})
    assert operator_norm(D)[0] == pytest.approx(5.0, rel=1e-9)
    assert spectral_norm(np.array([[1.0, -1.0], [1.0, -1.0]])) == pytest.approx(2.0, rel=1e-9)


def test_operator_norm_concatenation():
    T1 = CondLinearMap(ALG2.one, {0: np.eye(2), 1: 2 * np.eye(2)})
    T2 = CondLinearMap(ALG2.one, {0: 3 * np.eye(2), 1: 4 * np.eye(2)})
    p = Partition(ALG2.one, [ALG2.atom(0), ALG2.atom(1)])
    out = operator_norm(concatenate_maps([T1, T2], p))
    assert out[0] == pytest.approx(1.0) and out[1] == pytest.approx(4.0)


def test_operator_norm_matches_numpy(rng):
    for _ in range(50):
        M = rng.standard_normal((int(rng.integers(1, 5)), int(rng.integers(1, 5))))
        for kind, order in (("l1", 1), ("l2", 2), ("linf", np.inf)):
            T = CondLinearMap(ALG1.one, {0: M}, CondNorm(kind), CondNorm(kind))
            assert operator_norm(T)[0] == pytest.approx(np.linalg.norm(M, order), rel=1e-9)


def test_operator_norm_vertex_max(rng):
    for _ in range(30):
        d = int(rng.integers(1, 5))
        M = rng.standard_normal((int(rng.integers(2, 5)), d))
        for kind in ("l1", "linf"):
            T = CondLinearMap(ALG1.one, {0: M}, CondNorm(kind), CondNorm(kind))
            if kind == "l1":
                V = np.vstack([np.eye(d), -np.eye(d)])
            else:
                V = np.array(list(itertools.product((1.0, -1.0), repeat=d)))
            assert operator_norm(T)[0] == float(lp_norm(kind, V @ M.T).max())
            assert sampled_operator_norm(T)[0] <= operator_norm(T)[0] * (1 + 1e-12)


def test_operator_norm_rejects_gauge():
    body = SymmetricBody.box(ALG1.one, 2)
    T = CondLinearMap(ALG1.one, {0: np.eye(2)}, CondNorm("gauge", body), CondNorm("l2"))
    with pytest.raises(UnsupportedNormKind):
        operator_norm(T)


def test_norming_functional_examples():
    x = vec(ALG1, [3, 4])
    f = norming_functional(x, "l2")
    np.testing.assert_allclose(f[0][0], [0.6, 0.8])
    assert f.evaluate(x)[0] == pytest.approx(5.0, abs=1e-12)
    z = norming_functional(vec(ALG1, [0, 0]), "l2")
    assert z.evaluate(vec(ALG1, [0, 0]))[0] == 0.0
    y = vec(ALG1, [-2, 1])
    g = norming_functional(y, "linf")
    np.testing.assert_array_equal(g[0][0], [-1.0, 0.0])
    assert g.evaluate(y)[0] == 2.0
    tie = norming_functional(vec(ALG1, [2, -2]), "linf")
    np.testing.assert_array_equal(tie[0][0], [1.0, 0.0])


def test_embedding_examples():
    out = embedding_check(vec(ALG1, [3, 4]), "l2")
    assert out["sup_over_dual_ball"][0] == pytest.approx(5.0) and out["isometry_gap"][0] < 1e-12
    zero = embedding_check(vec(ALG1, [0, 0]), "l2")
    assert zero["sup_over_dual_ball"][0] == 0.0 and zero["isometry_gap"][0] == 0.0
    one = embedding_check(vec(ALG1, [1, 1]), "l1")
    assert one["sup_over_dual_ball"][0] == pytest.approx(2.0)
    f = norming_functional(vec(ALG1, [1, 1]), "l1")
    np.testing.assert_array_equal(f[0][0], [1.0, 1.0])
    assert functional_norm(f)[0] == 1.0


@given(arrays(np.float64, st.integers(1, 5), elements=st.floats(-100, 100)), st.sampled_from(["l1", "l2", "linf"]))
def test_norming_functional_property(v, kind):
    x = CondVector(ALG1.one, {0: v})
    f = norming_functional(x, kind)
    nx = float(lp_norm(kind, v))
    assert functional_norm(f)[0] <= 1 + 1e-12
    assert abs(f.evaluate(x)[0] - nx) <= 1e-12 * max(1.0, nx)


def test_double_dual_and_goldstine():
    x = vec(ALG1, [0.3, -1.2, 0.5])
    for kind in ("l1", "l2", "linf"):
        assert double_dual_norm(x, kind)[0] == pytest.approx(x.norm(kind)[0], rel=1e-6)
        for d in (1, 2, 3):
            assert goldstine_check(kind, d, resolution=0.25)["max_gap"] <= 1e-6


def test_sphere_net_covering(rng):
    for d in (1, 2, 3, 4):
        net = sphere_net(d, 0.25)
        np.testing.assert_allclose(np.linalg.norm(net, axis=1), 1.0)
        y = rng.standard_normal((2000, d))
        y /= np.linalg.norm(y, axis=1, keepdims=True)
        dist = np.linalg.norm(y[:, None, :] - net[None, :, :], axis=2).min(axis=1)
        assert dist.max() <= 0.25


def test_half_norming_example():
    F = [vec(ALG1, [1, 0])]
    hn = half_norming_set(F)
    rows = np.vstack([f[0] for f in hn["functionals"]])
    assert {tuple(r) for r in np.abs(rows).round(12)} == {(1.0, 0.0)}
    assert half_norming_value(hn["functionals"], vec(ALG1, [2, 0]))[0] == pytest.approx(2.0)
    assert half_norming_value(hn["functionals"], vec(ALG1, [0, 0]))[0] == 0.0


def test_half_norming_property(rng):
    for _ in range(30):
        d = int(rng.integers(1, 5))
        k = int(rng.integers(1, min(d, 3) + 1))
        F = [CondVector(ALG2.one, {a: rng.standard_normal(d) for a in range(2)}) for _ in range(k)]
        hn = half_norming_set(F)
        for _ in range(10):
            c = rng.standard_normal(k)
            y = CondVector(ALG2.one, {a: sum(ci * f[a] for ci, f in zip(c, F)) for a in range(2)})
            val = half_norming_value(hn["functionals"], y)
            for a in range(2):
                assert y.norm("l2")[a] / 2 <= val[a] + 1e-9


def _grid_min_l1_sphere(M, kind, steps=400):
    """Minimum of ||M z|| over a dense sample of the l1 sphere (an upper bound on the true minimum)."""
    n = M.shape[1]
    best = math.inf
    t = np.linspace(0, 1, steps + 1)
    for signs in itertools.product((1.0, -1.0), repeat=n):
        if n == 1:
            Z = np.array([[signs[0]]])
        elif n == 2:
            Z = np.column_stack([t, 1 - t]) * signs
        else:
            a, b = np.meshgrid(t, t)
            mask = a + b <= 1
            Z = np.column_stack([a[mask], b[mask], 1 - a[mask] - b[mask]]) * signs
        best = min(best, float(lp_norm(kind, Z @ M.T).min()))
    return best


def test_equivalence_constants_examples():
    basis = [vec(ALG1, [1, 0]), vec(ALG1, [0, 1])]
    ec = equivalence_constants(basis, "l2")
    assert ec["r_low"][0] == pytest.approx(math.sqrt(2) / 2, abs=1e-9)
    assert ec["r_high"][0] == pytest.approx(1.0, abs=1e-12)
    ec2 = equivalence_constants([vec(ALG1, [1, 0]), vec(ALG1, [0, 2])], "l2")
    assert ec2["r_high"][0] == pytest.approx(2.0)
    with pytest.raises(NotInjective):
        equivalence_constants([vec(ALG1, [1, 1]), vec(ALG1, [2, 2])], "l2")


def test_equivalence_constants_grid_oracle(rng):
    for _ in range(15):
        n = int(rng.integers(1, 4))
        M = rng.standard_normal((n, n))
        basis = [CondVector(ALG1.one, {0: M[:, k]}) for k in range(n)]
        for kind in ("l1", "l2", "linf"):
            low = equivalence_constants(basis, kind)["r_low"][0]
            grid = _grid_min_l1_sphere(M, kind, steps=400 if n < 3 else 60)
            assert low <= grid + 1e-9
            assert grid - low <= 0.05 * max(1.0, grid)


def test_banach_disk_constants():
    C = SymmetricBody.box(ALG1.one, 2)
    out = banach_disk_constants(C, "l2")
    assert out["r_high"][0] == pytest.approx(math.sqrt(2))
    assert out["r_in"][0] == pytest.approx(1.0)


def test_direct_sum_examples():
    x = [vec(ALG1, [3]), vec(ALG1, [4])]
    out = direct_sum_l2(x, [vec(ALG1, [1]), vec(ALG1, [0])])
    assert out["norm2"][0] == pytest.approx(5.0)
    assert out["pairing"][0] == pytest.approx(3.0)
    assert out["functional_norm"][0] == pytest.approx(1.0) and out["dual_norm2"][0] == pytest.approx(1.0)
    zero = direct_sum_l2(x, [vec(ALG1, [0]), vec(ALG1, [0])])
    assert zero["pairing"][0] == 0.0 and zero["pairing_norm_gap"][0] == 0.0


def test_direct_sum_streams_need_tail():
    s = lambda k: vec(ALG1, [2.0**-k])  # noqa: E731
    with pytest.raises(UncertifiedTail):
        direct_sum_l2(s, s)
    out = direct_sum_l2(s, s, truncation=40, tail_bound=4.0**-40)
    assert out["norm2"][0] ** 2 == pytest.approx(1 / 3, abs=1e-15)


def test_direct_sum_gap_property(rng):
    for _ in range(100):
        k = int(rng.integers(1, 5))
        dims = rng.integers(1, 4, k)
        x = [CondVector(ALG1.one, {0: rng.standard_normal(d)}) for d in dims]
        f = [CondVector(ALG1.one, {0: rng.standard_normal(d)}) for d in dims]
        norms = [["l1", "l2", "linf"][int(i)] for i in rng.integers(0, 3, k)]
        out = direct_sum_l2(x, f, norms)
        assert out["pairing_norm_gap"][0] <= 1e-6
        assert abs(out["pairing"][0]) <= out["dual_norm2"][0] * out["norm2"][0] + 1e-9


def test_renorm_reference():
    K = SymmetricBody.box(ALG1.one, 1)
    out = renorm_sequence(K, K, CondVector.constant(ALG1.one, [1.0]), 40)
    for n, g in enumerate(out["gauges"][:10], start=1):
        assert g[0] == pytest.approx(1 / (2**n + 2.0**-n), rel=1e-12)
    assert out["sum_squares"][0] == pytest.approx(REF_SUM, abs=1e-12)
    assert out["norm_C"][0] == pytest.approx(REF_NORM, abs=1e-12)
    assert out["tail_bound"][0] <= 4.0**-40
    assert out["sum_bound_ok"] == ALG1.one
    zero = renorm_sequence(K, K, CondVector.constant(ALG1.one, [0.0]), 40)
    assert zero["norm_C"][0] == 0.0


def test_renorm_vertices_of_K(rng):
    d = 2
    grid = direction_grid(d, 6)
    K = SymmetricBody.from_support(ALG1.one, {0: grid}, lambda a, U: np.abs(U @ rng.standard_normal((d, 3))).max(1))
    B_E = SymmetricBody.euclidean(ALG1.one, d, grids={0: grid})
    C = RenormBody(K, B_E, 40)
    V = K.vertices(0)
    for n, B in enumerate(C.bodies[:20], start=1):
        assert B.atom_gauge(0, V).max() <= 2.0**-n + 1e-9
    assert C.atom_sum_squares(0, V).max() <= 1 / 3 + 1e-6
    assert body_inclusion(K, C)["included_condition"] == ALG1.one


def test_body_json_roundtrip():
    C = SymmetricBody.euclidean(ALG2.one, 2)
    D = SymmetricBody.from_json(ALG2, C.to_json())
    for a in range(2):
        np.testing.assert_array_equal(C.directions(a), D.directions(a))
        np.testing.assert_array_equal(C.offsets(a), D.offsets(a))


def test_map_json_roundtrip():
    T = CondLinearMap(ALG2.one, {0: np.eye(2), 1: np.ones((1, 3))}, CondNorm("l1"), CondNorm("linf"))
    assert CondLinearMap.from_json(ALG2, T.to_json()) == T


@given(arrays(np.float64, (3, 3), elements=st.floats(-10, 10)))
def test_spectral_norm_matches_svd(M):
    assert spectral_norm(M) == pytest.approx(np.linalg.norm(M, 2), rel=1e-8, abs=1e-12)
