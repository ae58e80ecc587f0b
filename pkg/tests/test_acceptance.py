"""Acceptance criteria, one test each, with their stated tolerances and time budgets.

Every test prints a single ``PASS``/``FAIL`` line with the measured
quantity and the wall time, also when pytest captures output.
"""

import itertools
import json
import os
import re
import subprocess
import sys
import time

import numpy as np
import pytest

from condan.boolean_algebra import Algebra
from condan.core import ConditionalValue, StableSet, stable_hull
from condan.harness import SuiteConfig, concatenation_closure, reference_renorm, run_suite
from condan.linear import CondVector, equivalence_constants, lp_norm


@pytest.fixture
def record(capsys):
    def emit(name, ok, detail, elapsed, budget):
        status = "PASS" if ok and elapsed < budget else "FAIL"
        with capsys.disabled():
            print(f"\n[{status}] {name}: {detail} ({elapsed:.2f} s, budget {budget:g} s)")
        return status == "PASS"

    return emit


def suite(name, **kw):
    start = time.perf_counter()
    r = run_suite(name, SuiteConfig(name, **kw))
    return r, time.perf_counter() - start


def summary(r):
    return f"{r.passed}/{r.cases} cases, max violation {r.max_violation:.3g} at tol {r.tolerance:.3g}"


def test_stable_hull_exhaustive(record):
    start = time.perf_counter()
    mismatches = checked = 0
    for m in (1, 2, 3):
        alg = Algebra(m)
        for u in (1, 2, 3, 4):
            values = list(itertools.product(range(u), repeat=m))
            for k in (1, 2):
                for combo in itertools.combinations(values, k):
                    gens = [ConditionalValue(alg.one, dict(enumerate(v))) for v in combo]
                    hull = {tuple(v.values.values()) for v in stable_hull(gens).members()}
                    mismatches += hull != concatenation_closure(gens)
                    checked += 1
    elapsed = time.perf_counter() - start
    assert record("stable hull == concatenation closure", mismatches == 0,
                  f"{checked} generator lists, {mismatches} mismatches", elapsed, 5)


def test_power_set_boolean_laws(record):
    rng = np.random.default_rng(2)
    start = time.perf_counter()
    violations = 0
    for _ in range(1000):
        m = int(rng.integers(1, 4))
        alg = Algebra(m)
        U = StableSet(alg.one, {a: set(range(4)) for a in range(m)})

        def rand_set():
            sets = {a: {v for v in range(4) if rng.random() < 0.5} for a in range(m)}
            sets = {a: s for a, s in sets.items() if s}
            return StableSet(alg.condition(sets), sets)

        F, G, H = rand_set(), rand_set(), rand_set()
        c = lambda S: S.complement(U)  # noqa: E731
        laws = [
            c(F | G) == c(F) & c(G),
            c(F & G) == c(F) | c(G),
            F & (G | H) == (F & G) | (F & H),
            F | (G & H) == (F | G) & (F | H),
            F | c(F) == U,
            (F & c(F)).is_null,
        ]
        violations += laws.count(False)
    elapsed = time.perf_counter() - start
    assert record("power-set Boolean laws", violations == 0,
                  f"1000 triples, {violations} violations", elapsed, 2)


def test_gauge(record):
    r, elapsed = suite("gauge", atoms=3, seed=1, cases=10_000, max_dim=4)
    assert record("gauge homogeneity, triangle, bisection oracle", r.ok, summary(r), elapsed, 10)


def test_cauchy_schwarz(record):
    r, elapsed = suite("cauchy_schwarz", atoms=2, seed=1, cases=10_000)
    assert record("Cauchy-Schwarz inequality and equality", r.ok, summary(r), elapsed, 5)


def test_embedding_and_goldstine(record):
    r, elapsed = suite("embedding", atoms=2, seed=1, cases=1000)
    assert record("isometric embedding, norming functional, Goldstine", r.ok, summary(r), elapsed, 5)


def test_baire(record):
    r, elapsed = suite("baire", atoms=3, seed=1, cases=100)
    assert record("Baire ball inside E_index", r.ok and r.cases == 100, summary(r), elapsed, 10)


def test_uniform_boundedness(record):
    r, elapsed = suite("ubp", atoms=3, seed=1, cases=1000)
    assert record("uniform bound over the stable hull", r.ok, summary(r), elapsed, 5)


def test_heine_borel(record):
    r, elapsed = suite("heine_borel", atoms=3, seed=1, cases=100)
    assert record("compactness iff finite subcover", r.ok and r.cases == 100, summary(r), elapsed, 5)


def test_eberlein_smulian(record):
    r, elapsed = suite("eberlein_smulian", atoms=3, seed=1, cases=200)
    assert record("sequential compactness and half-norming", r.ok and r.cases == 200, summary(r), elapsed, 15)


def test_l2_duality(record):
    r, elapsed = suite("l2_duality", atoms=2, seed=1, cases=1000)
    assert record("l2 direct-sum duality and tail", r.ok, summary(r), elapsed, 5)


def test_amir_lindenstrauss(record):
    start = time.perf_counter()
    ref = reference_renorm(40)
    norm_c, sq = ref["norm_C"][0], ref["sum_squares"][0]
    ref_ok = abs(norm_c - 0.48547) <= 1e-4 and abs(sq - 0.235687) <= 1e-5
    r = run_suite("amir_lindenstrauss", SuiteConfig("amir_lindenstrauss", atoms=3, seed=1, cases=50))
    elapsed = time.perf_counter() - start
    detail = f"||1||_C = {norm_c:.6f}, sum = {sq:.7f}; {summary(r)}"
    assert record("renorming pipeline", ref_ok and r.ok, detail, elapsed, 10)


def test_heine_borel_constants(record):
    rng = np.random.default_rng(3)
    start = time.perf_counter()
    one = Algebra(2).one
    worst = -np.inf
    total = 0
    for i in range(10):
        kind = ("l1", "l2", "linf")[i % 3]
        d = 1 + i % 3
        basis = [CondVector(one, {a: rng.standard_normal(d) for a in one}) for _ in range(d)]
        ec = equivalence_constants(basis, kind)
        Z = rng.standard_normal((1000, d)) * rng.uniform(0.1, 10, (1000, 1))
        total += len(Z)
        for a in one:
            B = np.column_stack([v[a] for v in basis])
            z1 = lp_norm("l1", Z)
            tz = lp_norm(kind, Z @ B.T)
            worst = max(worst, float(((ec["r_low"][a] * z1 - tz) / z1).max()))
            worst = max(worst, float(((tz - ec["r_high"][a] * z1) / z1).max()))
    e = Algebra(1).one
    ref = equivalence_constants([CondVector(e, {0: np.array([1.0, 0.0])}), CondVector(e, {0: np.array([0.0, 1.0])})], "l2")
    r_low, r_high = ref["r_low"][0], ref["r_high"][0]
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-6 and abs(r_low - 0.7071) <= 1e-3 and abs(r_high - 1) <= 1e-6
    detail = f"{total} z, worst relative excess {worst:.3g}; reference r_low {r_low:.6f}, r_high {r_high:.6f}"
    assert record("equivalence constants r_low, r_high", ok, detail, elapsed, 5)


def _strip_runtime(text):
    return re.sub(r'"runtime_ms": [0-9.eE+-]+', '"runtime_ms": 0', text)


def test_cli_end_to_end(record, tmp_path):
    env = {**os.environ, "CONDAN_THREADS": os.environ.get("CONDAN_THREADS", "1")}
    texts, times, codes = [], [], []
    for i in range(2):
        out = tmp_path / f"run{i}.json"
        cmd = [sys.executable, "-m", "condan.cli", "run", "--suite", "all", "--atoms", "3", "--seed", "42", "--report", str(out)]
        start = time.perf_counter()
        proc = subprocess.run(cmd, capture_output=True, text=True, env=env)
        times.append(time.perf_counter() - start)
        codes.append(proc.returncode)
        texts.append(out.read_text() if out.exists() else "")
    identical = _strip_runtime(texts[0]) == _strip_runtime(texts[1])
    ok = codes == [0, 0] and identical and json.loads(texts[0])["passed"]
    detail = f"exit codes {codes}, reruns identical modulo runtime: {identical}"
    assert record("condan run --suite all --atoms 3 --seed 42", ok, detail, max(times), 60)
