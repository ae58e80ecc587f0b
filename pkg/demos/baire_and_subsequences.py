"""Baire localisation and Bolzano-Weierstrass extraction, atom by atom.

Run with ``python3 demos/baire_and_subsequences.py``.
"""

import numpy as np

from condan.analysis import (
    CondSequence,
    IntervalProduct,
    baire_locate,
    extract_convergent_subsequence,
    verify_ball,
)
from condan.boolean_algebra import Algebra
from condan.errors import UnboundedOnCondition
from condan.linear import CondVector
from condan.numbers import CondReal

alg = Algebra(2)
one = alg.one


def box(lo, hi):
    return IntervalProduct(
        CondVector(one, {a: np.array([lo[a]]) for a in one}),
        CondVector(one, {a: np.array([hi[a]]) for a in one}),
    )


# [0, 1] covered by two closed pieces; the pieces differ per atom
space = box([0, 0], [1, 1])
E = [box([0, 0], [1, 0.1]), box([0.9, 0], [1, 1])]
res = baire_locate(space, E)
print("ball centre:", res["center"], "radius:", res["radius"], "index:", res["index"])
print("violations at 10x resolution:", verify_ball(res["center"], res["radius"], res["index"], E, 0.001))

# a bounded sequence: oscillating on atom 0, null on atom 1
seq = CondSequence(lambda k: CondReal(one, {0: (-1.0) ** k, 1: 1 / k}))
out = extract_convergent_subsequence(seq, box([-1, -1], [1, 1]), budget=256)
print("first indices per atom:", [(n[0], n[1]) for n in out["indices"][:5]])
print("limit:", out["limit"])

# unbounded on atom 0 only: extraction names the atom
seq = CondSequence(lambda k: CondReal(one, {0: float(k), 1: 0.0}))
try:
    extract_convergent_subsequence(seq, box([-1, -1], [1, 1]), budget=64)
except UnboundedOnCondition as exc:
    print("unbounded on:", exc.condition)
