"""Reproducible theorem suites.

Each suite binds one result to the operations that carry its constructive
content, draws instances from fixed distributions and reports pass/fail
statistics.  Reports depend only on :class:`SuiteConfig` (apart from
``runtime_ms``): every case draws from its own RNG stream
``default_rng([seed, suite_id, case])``.

Suite to result map:

==================  ==========================================================
core                stable hulls, concatenation axioms, conditional power set
numbers             conditional order, inverse, sup/inf, conditional sums
gauge               gauge functional: finite, homogeneous, subadditive
linear              operator norms, Heine-Borel constants, Banach disks
embedding           natural embedding into the bidual; Goldstine/reflexivity
baire               Baire category theorem (nested-ball localization)
ubp                 uniform boundedness principle
heine_borel         Heine-Borel versus finite subcovers
eberlein_smulian    compact iff sequentially compact; half-norming nets
amir_lindenstrauss  renorming by 2^n K + 2^-n B_E; weak-* sequential compactness
l2_duality          the l2 direct sum and its dual
cauchy_schwarz      Cauchy-Schwarz for conditional series
==================  ==========================================================
"""

from __future__ import annotations

import itertools
import json
import math
import os
import time
from collections.abc import Callable
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from condan.analysis import (
    CondSequence,
    IntervalProduct,
    baire_locate,
    compactness_check,
    extract_convergent_subsequence,
    extract_finite_subcover,
    hull_members,
    is_subsequence_index,
    uniform_bound,
    verify_ball,
)
from condan.boolean_algebra import Algebra, Condition, Partition, make_partition
from condan.core import ConditionalValue, StableSet, concatenate, restrict, stable_hull
from condan.errors import GenerationFailed, NotBounded, UnboundedOnCondition, UnknownSuite
from condan.linear import (
    CondLinearMap,
    CondNorm,
    CondVector,
    RenormBody,
    SymmetricBody,
    banach_disk_constants,
    body_inclusion,
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
)
from condan.numbers import (
    CondNat,
    CondReal,
    cauchy_schwarz_eval,
    compare,
    cond_inverse,
    indicator,
    partial_sum,
    sup_inf,
)
from condan.core import support

SUITES = (
    "core",
    "numbers",
    "gauge",
    "linear",
    "embedding",
    "baire",
    "ubp",
    "heine_borel",
    "eberlein_smulian",
    "amir_lindenstrauss",
    "l2_duality",
    "cauchy_schwarz",
)

#: Heavy suites run at most this many cases.
CASE_CAPS = {"baire": 100, "heine_borel": 100, "eberlein_smulian": 200, "amir_lindenstrauss": 50}

#: Version of the instance distributions; bump on any generator change.
GENERATOR_VERSION = 1


@dataclass(frozen=True)
class SuiteConfig:
    suite_name: str = "core"
    atoms: int = 2
    seed: int = 0
    tol: float = 1e-9
    truncation: int = 40
    cases: int = 1000
    max_dim: int = 3

    def __post_init__(self):
        if self.atoms < 1:
            raise ValueError("atoms must be >= 1")
        if self.tol <= 0:
            raise ValueError("tol must be > 0")
        if self.truncation < 1:
            raise ValueError("truncation must be >= 1")
        if self.cases < 0:
            raise ValueError("cases must be >= 0")

    @property
    def algebra(self) -> Algebra:
        return Algebra(self.atoms)

    def to_json(self) -> dict:
        return asdict(self)


@dataclass
class SuiteReport:
    suite: str
    config: SuiteConfig
    cases: int = 0
    passed: int = 0
    failed: int = 0
    max_violation: float = 0.0
    tolerance: float = 0.0
    witnesses: list = field(default_factory=list)
    runtime_ms: float = 0.0

    @property
    def ok(self) -> bool:
        return self.failed == 0

    def to_json(self) -> dict:
        return {
            "suite": self.suite,
            "config": self.config.to_json(),
            "cases": self.cases,
            "passed": self.passed,
            "failed": self.failed,
            "max_violation": self.max_violation,
            "tolerance": self.tolerance,
            "witnesses": self.witnesses,
            "runtime_ms": self.runtime_ms,
        }


class Checks:
    """Collects the verdicts of one case.

    ``le(lhs, rhs, tol, scale=s)`` records the relative excess
    ``(lhs - rhs) / s``; it fails when that is above ``tol``.  ``true(flag)`` records a structural check.
    """

    def __init__(self):
        self.excess = 0.0
        self.tolerance = 0.0
        self.failures: list[dict] = []

    def le(self, lhs: float, rhs: float, tol: float, label: str, scale: float = 1.0, **detail) -> None:
        ex = (float(lhs) - float(rhs)) / float(scale)
        self.tolerance = max(self.tolerance, tol)
        if math.isfinite(ex):
            self.excess = max(self.excess, ex)
        if not ex <= tol:
            self.failures.append(
                {"check": label, "lhs": float(lhs), "rhs": float(rhs), "tol": tol, "scale": float(scale), **detail}
            )

    def close(self, a: float, b: float, tol: float, label: str, scale: float = 1.0, **detail) -> None:
        self.le(abs(float(a) - float(b)), 0.0, tol, label, scale, **detail)

    def true(self, flag: bool, label: str, **detail) -> None:
        if not flag:
            self.failures.append({"check": label, **detail})


# --------------------------------------------------------------------------
# Instance generators


def _rng(config: SuiteConfig, case: int) -> np.random.Generator:
    return np.random.default_rng([config.seed, SUITES.index(config.suite_name) if config.suite_name in SUITES else 99, case])


def _random_dims(rng, on: Condition, lo: int, hi: int) -> dict[int, int]:
    return {a: int(rng.integers(lo, hi + 1)) for a in on}


def _random_body(rng, on: Condition, dims: dict[int, int], n_dirs: int = 8) -> SymmetricBody:
    data = {}
    for a in on:
        d = dims[a]
        extra = rng.standard_normal((max(n_dirs - d, 0), d))
        extra /= np.maximum(np.linalg.norm(extra, axis=1, keepdims=True), 1e-12)
        U = np.vstack([np.eye(d), extra])[:n_dirs] if d > 1 else np.vstack([np.eye(1), extra])
        c = rng.uniform(0.5, 2.0, len(U))
        data[a] = (U, c)
    return SymmetricBody(on, data)


def _random_vector(rng, on: Condition, dims: dict[int, int], scale: float = 1.0) -> CondVector:
    return CondVector(on, {a: scale * rng.standard_normal(dims[a]) for a in on})


def generate_instance(kind: str, config: SuiteConfig, rng: np.random.Generator | None = None) -> dict:
    """Random instance of ``kind`` satisfying its suite's hypotheses by construction.

    Hypotheses are re-verified before returning; a violation raises
    :class:`GenerationFailed`.
    """
    rng = rng if rng is not None else _rng(config, 0)
    alg = config.algebra
    one = alg.one
    dmax = max(1, config.max_dim)

    if kind == "body":
        dims = _random_dims(rng, one, 1, dmax)
        body = _random_body(rng, one, dims)
        if body.bounded_condition() != one:
            raise GenerationFailed("random body directions do not span")
        return {"body": body, "dims": dims}

    if kind == "closed_cover":
        d = int(rng.integers(1, min(dmax, 2) + 1))
        lo = CondVector.constant(one, np.zeros(d))
        hi = CondVector.constant(one, np.ones(d))
        pieces = int(rng.integers(2, 4))
        sets_per_atom = {}
        for a in one:
            boxes = [(np.zeros(d), np.ones(d))]
            while len(boxes) < pieces:
                i = int(np.argmax([np.prod(h - l) for l, h in boxes]))
                l, h = boxes.pop(i)
                axis = int(rng.integers(d))
                cut = l[axis] + rng.uniform(0.2, 0.8) * (h[axis] - l[axis])
                h1, l2 = h.copy(), l.copy()
                h1[axis] = cut
                l2[axis] = cut
                boxes += [(l, h1), (l2, h)]
            order = rng.permutation(len(boxes))
            sets_per_atom[a] = [boxes[i] for i in order]
        sets = [
            IntervalProduct(
                CondVector(one, {a: sets_per_atom[a][i][0] for a in one}),
                CondVector(one, {a: sets_per_atom[a][i][1] for a in one}),
            )
            for i in range(pieces)
        ]
        space = IntervalProduct(lo, hi)
        grid = np.array(list(itertools.product(np.linspace(0, 1, 17), repeat=d)))
        for a in one:
            hit = np.zeros(len(grid), dtype=bool)
            for s in sets:
                hit |= s.atom_contains(a, grid)
            if not hit.all():
                raise GenerationFailed("generated sets do not cover the box")
        return {"space": space, "sets": sets, "dim": d}

    if kind == "sequence":
        dims = _random_dims(rng, one, 1, dmax)
        budget = 256
        radius = 1.0
        region = SymmetricBody.box(one, dims, radius)
        planted = [a for a in one if rng.random() < 0.3]
        table = {}
        for a in one:
            P = rng.uniform(-radius, radius, (budget, dims[a]))
            if a in planted:
                start = int(rng.integers(budget // 2))
                direction = rng.standard_normal(dims[a])
                direction /= np.abs(direction).max()
                ks = np.arange(start, budget)
                P[start:] = direction * (radius * (1.0 + (ks - start + 1)[:, None]))
            table[a] = P
        return {
            "sequence": CondSequence.from_table(one, table),
            "region": region,
            "unbounded": alg.condition(planted),
            "budget": budget,
        }

    if kind == "operator_family":
        count = int(rng.integers(1, 4))
        kind_ = ("l1", "l2", "linf")[int(rng.integers(3))]
        din = _random_dims(rng, one, 1, dmax)
        dout = _random_dims(rng, one, 1, dmax)
        norm = CondNorm(kind_)
        gens = [
            CondLinearMap(one, {a: rng.standard_normal((dout[a], din[a])) for a in one}, norm, norm)
            for _ in range(count)
        ]
        return {"generators": gens, "din": din, "dout": dout, "norm": norm}

    if kind == "dense_points":
        d = int(rng.integers(1, min(dmax, 3) + 1))
        count = int(rng.integers(1, d + 2))
        pts = [CondVector(one, {a: rng.standard_normal(d) for a in one}) for _ in range(count)]
        return {"points": pts, "dim": d, "total_expected": count >= d}

    if kind == "l2_element":
        k = int(rng.integers(1, 6))
        comps, funcs, norms = [], [], []
        for _ in range(k):
            dims = _random_dims(rng, one, 1, dmax)
            comps.append(_random_vector(rng, one, dims))
            funcs.append(_random_vector(rng, one, dims))
            norms.append(CondNorm(("l1", "l2", "linf")[int(rng.integers(3))]))
        return {"x": comps, "functionals": funcs, "norms": norms}

    if kind == "renorm_pair":
        d = int(rng.integers(1, min(dmax, 3) + 1))
        grid = direction_grid(d, extra=6 if d > 1 else 0, seed=int(rng.integers(1 << 30)))
        K_data, E_data = {}, {}
        shape = ("box", "euclidean", "cross")[int(rng.integers(3))]
        for a in one:
            pts = rng.standard_normal((d + 2, d)) * rng.uniform(0.3, 1.5)
            h = np.abs(grid @ pts.T).max(axis=1)
            if np.any(h <= 1e-6):
                raise GenerationFailed("degenerate K")
            K_data[a] = (grid, h)
            if shape == "box":
                E_data[a] = (grid, lp_norm("l1", grid))
            elif shape == "euclidean":
                E_data[a] = (grid, lp_norm("l2", grid))
            else:
                E_data[a] = (grid, lp_norm("linf", grid))
        K = SymmetricBody(one, K_data, tight=False)
        B_E = SymmetricBody(one, E_data, tight=True)
        if K.bounded_condition() != one:
            raise GenerationFailed("K is not bounded")
        return {"K": K, "B_E": B_E, "dim": d}

    raise GenerationFailed(f"unknown instance kind {kind!r}")


# --------------------------------------------------------------------------
# Oracles shared with the tests


def concatenation_closure(generators) -> set:
    """Closure of ``generators`` under two-block concatenations ``x|b + y|b^c``.

    Members are returned as tuples of payloads (in atom order).  Every
    finite concatenation is an iterate of two-block ones, so the fixpoint
    is the stable hull by definition.
    """
    on = generators[0].on
    atoms = list(on)
    conds = list(on.algebra.conditions())
    conds = [c for c in conds if c <= on]
    current = {tuple(g[a] for a in atoms) for g in generators}
    while True:
        new = set(current)
        for x, y in itertools.product(current, repeat=2):
            for b in conds:
                new.add(tuple(x[i] if a in b else y[i] for i, a in enumerate(atoms)))
        if new == current:
            return current
        current = new


# --------------------------------------------------------------------------
# Suites


def _case_core(rng, cfg: SuiteConfig, chk: Checks) -> None:
    m = min(cfg.atoms, 3)
    alg = Algebra(m)
    one = alg.one
    universe_vals = list(range(int(rng.integers(1, 5))))
    # stable hull against the concatenation closure
    gens = [
        ConditionalValue(one, {a: int(rng.choice(universe_vals)) for a in one})
        for _ in range(int(rng.integers(1, 4)))
    ]
    hull = stable_hull(gens)
    members = {tuple(v[a] for a in one) for v in hull.members()}
    chk.true(members == concatenation_closure(gens), "stable_hull == closure",
             generators=[g.to_json() for g in gens])
    # axioms: restriction consistency and unique concatenation
    x = gens[0]
    b = alg.condition(a for a in one if rng.random() < 0.5)
    c = alg.condition(a for a in b if rng.random() < 0.5)
    chk.true(restrict(restrict(x, b), c) == restrict(x, c), "restriction consistency")
    labels = {a: int(rng.integers(2)) for a in one}
    p = make_partition(one, labels)
    vals = [gens[i % len(gens)] for i in range(len(p.blocks))]
    z = concatenate(vals, p)
    chk.true(all(restrict(z, blk) == restrict(v, blk) for v, blk in zip(vals, p.blocks)), "concatenation agrees")
    # conditional power set laws relative to a fixed universe
    U = StableSet(one, {a: set(range(4)) for a in one})

    def rand_set():
        sets = {}
        for a in one:
            s = {v for v in range(4) if rng.random() < 0.5}
            if s:
                sets[a] = s
        return StableSet(alg.condition(sets), sets)

    F, G, H = rand_set(), rand_set(), rand_set()
    chk.true(F.union(G).complement(U) == F.complement(U).intersection(G.complement(U)), "De Morgan (union)")
    chk.true(F.intersection(G).complement(U) == F.complement(U).union(G.complement(U)), "De Morgan (intersection)")
    chk.true(F.intersection(G.union(H)) == F.intersection(G).union(F.intersection(H)), "distributivity")
    chk.true(F.union(F.complement(U)) == U, "complement join")
    chk.true(F.intersection(F.complement(U)).is_null, "complement meet")
    chk.true(F.complement(U).complement(U) == F, "double complement")
    chk.true(StableSet.null(alg) <= F and F <= U, "least and greatest elements")


def _case_numbers(rng, cfg: SuiteConfig, chk: Checks) -> None:
    alg = cfg.algebra
    one = alg.one
    r = CondReal(one, {a: float(rng.choice([0.0, rng.normal()])) for a in one})
    s = CondReal(one, {a: rng.normal() for a in one})
    prod = r * cond_inverse(r)
    ind = indicator(support(r, 0.0))
    for a in one:
        chk.le(abs(prod[a] - ind[a]), 0.0, 1e-15, "r * r^-1 == 1 on supp(r)")
    cmp = compare(r, s)
    chk.true(cmp["leq_condition"] == alg.condition(a for a in one if r[a] <= s[a]), "per-atom order")
    chk.true((r + s) - s == r or all(abs(((r + s) - s)[a] - r[a]) <= 1e-15 * (1 + abs(r[a]) + abs(s[a])) for a in one), "additive inverse")
    # partial sums respect concatenation of the upper index
    terms = [CondReal(one, {a: rng.normal() for a in one}) for _ in range(12)]
    n1 = CondNat(one, {a: int(rng.integers(1, 13)) for a in one})
    n2 = CondNat(one, {a: int(rng.integers(1, 13)) for a in one})
    b = alg.condition(a for a in one if rng.random() < 0.5)
    p = Partition(one, [b, ~b])
    n = concatenate([n1, n2], p)
    lhs = partial_sum(terms, n)
    rhs = concatenate([partial_sum(terms, n1), partial_sum(terms, n2)], p)
    chk.true(lhs == rhs, "partial_sum respects concatenation")
    # sup over the hull equals sup over the closure (m <= 3)
    if cfg.atoms <= 3:
        gens = [CondReal(one, {a: float(rng.integers(-3, 4)) for a in one}) for _ in range(int(rng.integers(1, 4)))]
        si = sup_inf(stable_hull(gens))
        closure = concatenation_closure(gens)
        chk.true(all(si["sup"][a] == max(m[i] for m in closure) for i, a in enumerate(one)), "sup == closure max")
        chk.true(all(si["inf"][a] == min(m[i] for m in closure) for i, a in enumerate(one)), "inf == closure min")


def _bisection_gauge(body: SymmetricBody, atom: int, x: np.ndarray, rtol: float = 1e-13) -> float:
    """Smallest ``r`` with ``x in rC`` by bisection on the membership oracle."""

    def member(r):
        return bool(np.all(np.abs(body.directions(atom) @ x) <= r * body.offsets(atom)))

    if member(0.0):
        return 0.0
    hi = 1.0
    while not member(hi):
        hi *= 2.0
    lo = 0.0
    while hi - lo > rtol * hi:
        mid = (lo + hi) / 2
        if member(mid):
            hi = mid
        else:
            lo = mid
    return hi


def _case_gauge(rng, cfg: SuiteConfig, chk: Checks, bisect: bool = False) -> None:
    m = min(cfg.atoms, 3)
    alg = Algebra(m)
    one = alg.one
    dims = _random_dims(rng, one, 1, min(cfg.max_dim, 4))
    C = _random_body(rng, one, dims)
    x = _random_vector(rng, one, dims, rng.uniform(0.1, 5))
    y = _random_vector(rng, one, dims, rng.uniform(0.1, 5))
    r = CondReal(one, {a: rng.uniform(-5, 5) for a in one})
    gx, gy, gxy, grx = gauge(C, x), gauge(C, y), gauge(C, x + y), gauge(C, x * r)
    for a in one:
        chk.true(math.isfinite(gx[a]), "gauge finite")
        chk.le(abs(grx[a] - abs(r[a]) * gx[a]), 0.0, 1e-9, "homogeneity", scale=(1 + abs(r[a]) * gx[a]))
        chk.le(gxy[a], gx[a] + gy[a], 1e-9, "triangle inequality", scale=(1 + gx[a] + gy[a]))
        if bisect:
            ref = _bisection_gauge(C, a, x[a])
            chk.le(abs(gx[a] - ref), 0.0, 1e-9, "H-rep gauge vs bisection", scale=max(1.0, ref))


def _check_equivalence_constants(rng, cfg: SuiteConfig, chk: Checks) -> None:
    one = cfg.algebra.one
    d = int(rng.integers(1, min(cfg.max_dim, 3) + 1))
    basis = [CondVector(one, {a: rng.standard_normal(d) for a in one}) for _ in range(d)]
    kind = ("l1", "l2", "linf")[int(rng.integers(3))]
    ec = equivalence_constants(basis, kind)
    for a in one:
        B = np.column_stack([v[a] for v in basis])
        Z = rng.standard_normal((32, d)) * rng.uniform(0.1, 10)
        z1 = lp_norm("l1", Z)
        tz = lp_norm(kind, Z @ B.T)
        chk.le(float((ec["r_low"][a] * z1 - tz).max()), 0.0, 1e-6, "r_low |z|_1 <= ||Tz||", scale=float(z1.max()))
        chk.le(float((tz - ec["r_high"][a] * z1).max()), 0.0, 1e-6, "||Tz|| <= r_high |z|_1", scale=float(z1.max()))


def _case_linear(rng, cfg: SuiteConfig, chk: Checks, case: int = 0) -> None:
    one = cfg.algebra.one
    inst = generate_instance("operator_family", cfg, rng)
    T = inst["generators"][0]
    norm = inst["norm"]
    nT = operator_norm(T)
    for a in one:
        M = T[a]
        X = rng.standard_normal((16, M.shape[1]))
        lhs = norm.atom_norm(a, X @ M.T)
        rhs = nT[a] * norm.atom_norm(a, X)
        chk.le(float((lhs - rhs).max()), 0.0, cfg.tol, "||Tx|| <= ||T|| ||x||", scale=max(1.0, nT[a]))
        if norm.kind == "l2":
            chk.close(nT[a], np.linalg.norm(M, 2), 1e-9, "power iteration vs SVD", scale=max(1.0, nT[a]))
        elif M.shape[1] <= 4:
            # vertices of the domain ball
            if norm.kind == "l1":
                V = np.vstack([np.eye(M.shape[1]), -np.eye(M.shape[1])])
            else:
                V = np.array(list(itertools.product((1.0, -1.0), repeat=M.shape[1])))
            chk.true(nT[a] == float(norm.atom_norm(a, V @ M.T).max()), "analytic norm == vertex max",
                     analytic=nT[a])
    # stability of the operator norm under concatenation
    if len(inst["generators"]) > 1:
        S = inst["generators"][1]
        b = cfg.algebra.condition(a for a in one if rng.random() < 0.5)
        p = Partition(one, [b, ~b])
        from condan.linear import concatenate_maps

        chk.true(operator_norm(concatenate_maps([T, S], p)) == concatenate([nT, operator_norm(S)], p),
                 "operator norm commutes with concatenation")
    # Heine-Borel constants of a random basis (every fourth case, they solve LPs)
    if case % 4 == 0:
        _check_equivalence_constants(rng, cfg, chk)
    # Banach disk comparisons
    dims = _random_dims(rng, one, 1, min(cfg.max_dim, 3))
    C = _random_body(rng, one, dims)
    kind = ("l1", "l2", "linf")[int(rng.integers(3))]
    bd = banach_disk_constants(C, kind)
    for a in one:
        X = rng.standard_normal((16, dims[a]))
        nx = lp_norm(kind, X)
        gc = C.atom_gauge(a, X)
        chk.le(float((nx - bd["r_high"][a] * gc).max()), 0.0, 1e-9, "||x|| <= r ||x||_C", scale=float(nx.max() + 1))
        chk.le(float((bd["r_in"][a] * gc - nx).max()), 0.0, 1e-9, "r_in ||x||_C <= ||x||", scale=float(nx.max() + 1))
    # support additivity of the Minkowski combination
    grid = {a: direction_grid(dims[a], 6) for a in one}
    A = SymmetricBody.box(one, dims, grids=grid)
    E = SymmetricBody.euclidean(one, dims, grids=grid)
    al, be = rng.uniform(0, 3), rng.uniform(0, 3)
    S = minkowski_combine(al, A, be, E)
    for a in one:
        U = grid[a]
        expect = al * lp_norm("l1", U) + be * lp_norm("l2", U)
        chk.le(float(np.abs(S.atom_support(a, U) - expect).max()), 0.0, 1e-9,
               "h(aA + bB) == a h_A + b h_B on the grid", scale=(1 + float(expect.max())))


def _case_embedding(rng, cfg: SuiteConfig, chk: Checks, goldstine: bool = False) -> None:
    one = cfg.algebra.one
    dims = _random_dims(rng, one, 1, 5)
    x = _random_vector(rng, one, dims, rng.uniform(0.1, 10))
    if rng.random() < 0.05:
        x = CondVector.zeros(one, dims)
    for kind in ("l1", "l2", "linf"):
        res = embedding_check(x, kind, dual_samples=32, seed=int(rng.integers(1 << 30)))
        xs = norming_functional(x, kind)
        val = xs.evaluate(x)
        nx = x.norm(kind)
        dn = functional_norm(xs)
        for a in one:
            chk.le(res["isometry_gap"][a], 0.0, 1e-6, f"isometry gap ({kind})", scale=max(1.0, nx[a]))
            chk.le(abs(val[a] - nx[a]), 0.0, 1e-12, f"norming functional attains ({kind})", scale=max(1.0, nx[a]))
            chk.le(dn[a], 1.0, 1e-12, f"norming functional in dual ball ({kind})")
    d3 = {a: min(dims[a], 3) for a in one}
    xi = _random_vector(rng, one, d3)
    for kind in ("l1", "l2", "linf"):
        dd = double_dual_norm(xi, kind, resolution=0.05)
        nx = xi.norm(kind)
        for a in one:
            chk.le(abs(dd[a] - nx[a]), 0.0, 1e-6, f"bidual norm == norm ({kind})", scale=max(1.0, nx[a]))
    if goldstine:
        for kind in ("l1", "l2", "linf"):
            for d in (1, 2, 3):
                g = goldstine_check(kind, d, resolution=0.25)
                chk.le(g["max_gap"], 0.0, 1e-6, f"Goldstine grid ({kind}, dim {d})")


def _case_baire(rng, cfg: SuiteConfig, chk: Checks) -> None:
    m = min(cfg.atoms, 3)
    sub = SuiteConfig(cfg.suite_name, m, cfg.seed, cfg.tol, cfg.truncation, cfg.cases, min(cfg.max_dim, 2))
    inst = generate_instance("closed_cover", sub, rng)
    res = baire_locate(inst["space"], inst["sets"])
    chk.true(res["radius"].is_positive(), "positive radius")
    spacing = CondReal(res["radius"].on, {a: res["radius"][a] / 80 for a in res["radius"].on})
    bad = verify_ball(res["center"], res["radius"], res["index"], inst["sets"], spacing)
    chk.true(bad == 0, "ball inside E_index at 10x resolution", violations=bad)


def _case_ubp(rng, cfg: SuiteConfig, chk: Checks) -> None:
    m = min(cfg.atoms, 3)
    sub = SuiteConfig(cfg.suite_name, m, cfg.seed, cfg.tol, cfg.truncation, cfg.cases, cfg.max_dim)
    inst = generate_instance("operator_family", sub, rng)
    gens = inst["generators"]
    s = uniform_bound(gens)["s"]
    members = list(hull_members(gens))
    hull_sup = {a: max(operator_norm(T)[a] for T in members) for a in s.on}
    chk.true(all(hull_sup[a] == s[a] for a in s.on), "hull sup == generator max")
    norm = inst["norm"]
    for _ in range(3):
        T = members[int(rng.integers(len(members)))]
        for a in s.on:
            X = rng.standard_normal((8, T[a].shape[1]))
            lhs = norm.atom_norm(a, X @ T[a].T)
            rhs = s[a] * norm.atom_norm(a, X)
            chk.le(float((lhs - rhs).max()), 0.0, cfg.tol, "||T x|| <= s ||x||", scale=max(1.0, s[a]))


def _case_heine_borel(rng, cfg: SuiteConfig, chk: Checks) -> None:
    alg = cfg.algebra
    one = alg.one
    d = int(rng.integers(1, min(cfg.max_dim, 2) + 1))
    slabs = alg.condition(a for a in one if d > 1 and rng.random() < 0.3)
    data = {}
    for a in one:
        body = _random_body(rng, alg.atom(a), {a: d}, n_dirs=6)
        U, c = body.directions(a), body.offsets(a)
        if a in slabs:
            U, c = U[:1], c[:1]
        data[a] = (U, c)
    K = SymmetricBody(one, data)
    compact = compactness_check(K)["compact_condition"]
    chk.true(compact == one - slabs, "slabs rejected per atom", compact=compact.to_json())
    # covers built to cover: ball centres on a grid finer than the radius
    succeeded = []
    for a in one:
        try:
            V = K.vertices(a)
        except NotBounded:
            continue
        lo, hi = V.min(axis=0) - 0.1, V.max(axis=0) + 0.1
        step = rng.uniform(0.3, 0.6)
        axes = [np.arange(l, h + step, step) for l, h in zip(lo, hi)]
        centres = np.array(list(itertools.product(*axes)))
        radius = step * math.sqrt(d) / 2 * 1.05 + 1e-9
        Ka = K.restrict(alg.atom(a))
        cover = [(CondVector(Ka.on, {a: ctr}), CondReal(Ka.on, {a: radius})) for ctr in centres]
        res = extract_finite_subcover(Ka, cover, resolution=0.05)
        chk.true(len(res["selected"]) <= len(cover), "finite subcover")
        succeeded.append(a)
    chk.true(alg.condition(succeeded) == compact, "compact iff finite subcover extracted")


def _case_eberlein_smulian(rng, cfg: SuiteConfig, chk: Checks, sequences: int = 20) -> None:
    m = min(cfg.atoms, 3)
    sub = SuiteConfig(cfg.suite_name, m, cfg.seed, cfg.tol, cfg.truncation, cfg.cases, min(cfg.max_dim, 3))
    for _ in range(sequences):
        inst = generate_instance("sequence", sub, rng)
        seq, region, planted = inst["sequence"], inst["region"], inst["unbounded"]
        chk.true(compactness_check(region)["compact_condition"] == region.on, "region certified compact")
        try:
            res = extract_convergent_subsequence(seq, region, budget=inst["budget"])
        except UnboundedOnCondition as exc:
            chk.true(exc.condition == planted, "unboundedness detected exactly where planted",
                     detected=exc.condition.to_json(), planted=planted.to_json())
            continue
        chk.true(planted.is_zero, "extraction succeeded only without planted unboundedness")
        idx = res["indices"]
        chk.true(is_subsequence_index(idx), "indices strictly increasing")
        for n, bound in zip(idx, res["error_bounds"]):
            x = seq.at(n)
            for a in x.on:
                err = float(np.abs(x[a] - res["limit"][a]).max())
                chk.le(err, bound[a], 1e-12, "certified error bound")
    # half-norming net
    one = Algebra(m).one
    d = int(rng.integers(1, 5))
    k = int(rng.integers(1, min(d, 3) + 1))
    F = [CondVector(one, {a: rng.standard_normal(d) for a in one}) for _ in range(k)]
    hn = half_norming_set(F)
    for _ in range(5):
        coeff = rng.standard_normal(k) * rng.uniform(0.1, 10)
        y = CondVector(one, {a: sum(c * f[a] for c, f in zip(coeff, F)) for a in one})
        val = half_norming_value(hn["functionals"], y)
        ny = y.norm("l2")
        for a in one:
            chk.le(ny[a] / 2, val[a], 1e-9, "||y||/2 <= max |<y, z*_n>|")


def reference_renorm(truncation: int = 40) -> dict:
    """Renorming of ``x = 1`` with ``K = B_E = [-1, 1]``."""
    one = Algebra(1).one
    K = SymmetricBody.box(one, 1)
    return renorm_sequence(K, K, CondVector.constant(one, [1.0]), truncation)


def _case_amir_lindenstrauss(rng, cfg: SuiteConfig, chk: Checks, case: int = 1) -> None:
    if case == 0:
        ref = reference_renorm(cfg.truncation)
        chk.le(abs(ref["norm_C"][0] - 0.48547), 0.0, 1e-4, "reference ||1||_C")
        chk.le(abs(ref["sum_squares"][0] - 0.235687), 0.0, 1e-5, "reference sum of squares")
        chk.true(ref["sum_bound_ok"].is_one, "reference x in C")
    m = min(cfg.atoms, 3)
    sub = SuiteConfig(cfg.suite_name, m, cfg.seed, cfg.tol, cfg.truncation, cfg.cases, cfg.max_dim)
    inst = generate_instance("renorm_pair", sub, rng)
    K, B_E = inst["K"], inst["B_E"]
    C = RenormBody(K, B_E, cfg.truncation)
    for a in K.on:
        V = K.vertices(a)
        for n, B in enumerate(C.bodies[:20], start=1):
            chk.le(float(B.atom_gauge(a, V).max()), 2.0**-n, 1e-9, "||v||_n <= 2^-n", n=n)
        sums = C.atom_sum_squares(a, V)
        chk.le(float(sums.max()), 1.0 / 3.0, 1e-6, "sum ||v||_n^2 <= 1/3")
    chk.true(body_inclusion(K, C, tol=1e-9)["included_condition"] == K.on, "K inside C")
    chk.true(compactness_check(C)["compact_condition"] == K.on, "C certified compact")
    # a random sequence in the dual unit ball of the gauge norm of B_E
    one = K.on
    lo, hi, tables = {}, {}, {}
    budget = 256
    for a in one:
        P = B_E.directions(a) / B_E.offsets(a)[:, None]
        ext = np.vstack([P, -P])
        W = rng.dirichlet(np.ones(len(ext)), budget)
        tables[a] = W @ ext
        r = np.abs(ext).max(axis=0)
        lo[a], hi[a] = -r, r
    region = IntervalProduct(CondVector(one, lo), CondVector(one, hi))
    seq = CondSequence.from_table(one, tables)
    res = extract_convergent_subsequence(seq, region, budget=budget)
    chk.true(is_subsequence_index(res["indices"]), "dual-ball subsequence indices increasing")
    for n, bound in zip(res["indices"], res["error_bounds"]):
        x = seq.at(n)
        for a in one:
            chk.le(float(np.abs(x[a] - res["limit"][a]).max()), bound[a], 1e-12, "dual-ball certified bound")


def _case_l2_duality(rng, cfg: SuiteConfig, chk: Checks, case: int = 0) -> None:
    inst = generate_instance("l2_element", cfg, rng)
    res = direct_sum_l2(inst["x"], inst["functionals"], inst["norms"])
    dual = direct_sum_l2(inst["functionals"], inst["x"], [n.dual() for n in inst["norms"]])
    for a in res["norm2"].on:
        chk.le(res["pairing_norm_gap"][a], 0.0, 1e-6, "| ||T_x*|| - ||x*||_2 |", scale=max(1.0, res["dual_norm2"][a]))
        chk.le(abs(res["pairing"][a]), res["dual_norm2"][a] * res["norm2"][a], 1e-9, "Cauchy-Schwarz in the direct sum", scale=(1 + res["dual_norm2"][a] * res["norm2"][a]))
        chk.close(dual["norm2"][a], res["dual_norm2"][a], 1e-9, "dual of the sum is the sum of duals", scale=(1 + res["dual_norm2"][a]))
    # truncation of an infinitely supported element against its certified tail
    if case % 10:
        return
    one = cfg.algebra.one
    q = rng.uniform(0.1, 0.8)
    base = {a: rng.standard_normal(2) for a in one}
    stream = lambda k: CondVector(one, {a: base[a] * q**k for a in one})
    K = cfg.truncation
    tail = float(max(np.dot(v, v) for v in base.values())) * q ** (2 * (K + 1)) / (1 - q * q)
    short = direct_sum_l2(stream, stream, "l2", truncation=K, tail_bound=tail)
    long = direct_sum_l2(stream, stream, "l2", truncation=2 * K, tail_bound=tail * q ** (2 * K))
    for a in one:
        chk.le(long["norm2"][a] ** 2 - short["norm2"][a] ** 2, tail, 1e-12, "truncation error <= certified tail", scale=(1 + long["norm2"][a] ** 2))


def _case_cauchy_schwarz(rng, cfg: SuiteConfig, chk: Checks) -> None:
    one = cfg.algebra.one
    # finitely supported series: the truncation at the support length is exact (zero tail)
    n = int(rng.integers(1, cfg.truncation + 1))
    A = rng.standard_normal((n, len(one.atoms)))
    B = rng.standard_normal((n, len(one.atoms)))
    lam = rng.uniform(-3, 3)
    a_seq = [CondReal(one, dict(zip(one, row))) for row in A.tolist()]
    b_seq = [CondReal(one, dict(zip(one, row))) for row in B.tolist()]
    b_par = [CondReal(one, dict(zip(one, row))) for row in (lam * A).tolist()]
    res = cauchy_schwarz_eval(a_seq, b_seq, n, 0.0, 0.0, tol=1e-12)
    eq = cauchy_schwarz_eval(a_seq, b_par, n, 0.0, 0.0)
    for t in one:
        chk.le(res["lhs"][t], res["rhs"][t], 1e-12, "CS inequality", scale=max(1.0, res["rhs"][t]))
        chk.le(abs(eq["lhs"][t] - eq["rhs"][t]), 0.0, 1e-9, "CS equality for b = lambda a", scale=max(1.0, eq["rhs"][t]))


_CASES: dict[str, Callable] = {
    "core": _case_core,
    "numbers": _case_numbers,
    "gauge": lambda rng, cfg, chk, case: _case_gauge(rng, cfg, chk, bisect=case % 10 == 0),
    "linear": _case_linear,
    "embedding": lambda rng, cfg, chk, case: _case_embedding(rng, cfg, chk, goldstine=case == 0),
    "baire": _case_baire,
    "ubp": _case_ubp,
    "heine_borel": _case_heine_borel,
    "eberlein_smulian": _case_eberlein_smulian,
    "amir_lindenstrauss": lambda rng, cfg, chk, case: _case_amir_lindenstrauss(rng, cfg, chk, case),
    "l2_duality": _case_l2_duality,
    "cauchy_schwarz": _case_cauchy_schwarz,
}
_NEEDS_CASE = {"gauge", "linear", "embedding", "amir_lindenstrauss", "l2_duality"}


def effective_cases(name: str, cases: int) -> int:
    return min(cases, CASE_CAPS.get(name, cases))


def run_case(name: str, config: SuiteConfig, case: int) -> Checks:
    """Run one case; the witness of a failure is ``(suite, config, case)``."""
    cfg = config if config.suite_name == name else SuiteConfig(name, *list(asdict(config).values())[1:])
    rng = _rng(cfg, case)
    chk = Checks()
    fn = _CASES[name]
    try:
        if name in _NEEDS_CASE:
            fn(rng, cfg, chk, case)
        else:
            fn(rng, cfg, chk)
    except Exception as exc:  # noqa: BLE001 - a crash is a failed case with a witness
        chk.failures.append({"check": "exception", "error": f"{type(exc).__name__}: {exc}"})
    return chk


def worker_count() -> int:
    raw = os.environ.get("CONDAN_THREADS", "1")
    try:
        n = int(raw)
    except ValueError:
        n = 1
    if n == 0:
        return os.cpu_count() or 1
    return max(1, n)


def run_suite(name: str, config: SuiteConfig | None = None, threads: int | None = None) -> SuiteReport:
    """Execute suite ``name`` under ``config`` and aggregate a report.

    Cases run on ``threads`` workers (default from ``CONDAN_THREADS``, 0
    meaning one per CPU); the report does not depend on the worker count.
    """
    if name not in _CASES:
        raise UnknownSuite(name)
    config = config or SuiteConfig(name)
    if config.suite_name != name:
        config = SuiteConfig(name, *list(asdict(config).values())[1:])
    n = effective_cases(name, config.cases)
    start = time.perf_counter()
    threads = worker_count() if threads is None else max(1, threads)
    if threads > 1 and n > 1:
        with ThreadPoolExecutor(threads) as pool:
            results = list(pool.map(lambda k: run_case(name, config, k), range(n)))
    else:
        results = [run_case(name, config, k) for k in range(n)]
    report = SuiteReport(name, config, cases=n)
    for k, chk in enumerate(results):
        report.max_violation = max(report.max_violation, chk.excess)
        report.tolerance = max(report.tolerance, chk.tolerance)
        if chk.failures:
            report.failed += 1
            report.witnesses.append(
                {"case": k, "rng": [config.seed, SUITES.index(name), k], "failures": chk.failures[:5]}
            )
        else:
            report.passed += 1
    report.runtime_ms = round((time.perf_counter() - start) * 1000, 3)
    return report


def run_suites(names, config: SuiteConfig) -> list[SuiteReport]:
    return [run_suite(n, config) for n in names]


def report_document(reports: list[SuiteReport]) -> dict:
    return {
        "schema_version": "1.0",
        "generator_version": GENERATOR_VERSION,
        "passed": all(r.ok for r in reports),
        "reports": [r.to_json() for r in reports],
    }


def dumps_report(reports: list[SuiteReport]) -> str:
    return json.dumps(report_document(reports), indent=2, sort_keys=True)
