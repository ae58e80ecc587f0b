"""Gauges, operator norms and the renorming of a compact body.

Run with ``python3 demos/renorming.py``.
"""

import numpy as np

from condan.analysis import compactness_check
from condan.boolean_algebra import Algebra
from condan.linear import (
    CondLinearMap,
    CondVector,
    RenormBody,
    SymmetricBody,
    body_inclusion,
    gauge,
    operator_norm,
    renorm_sequence,
)

alg = Algebra(2)
one = alg.one

# a box on atom 0 and a rotated rectangle on atom 1
c, s = np.cos(0.5), np.sin(0.5)
C = SymmetricBody(one, {0: (np.eye(2), [1.0, 2.0]), 1: (np.array([[c, s], [-s, c]]), [1.0, 0.5])})
x = CondVector(one, {0: np.array([3.0, 2.0]), 1: np.array([1.0, 1.0])})
print("gauge of x:", gauge(C, x))

# operator norms under the three analytic norms
T = CondLinearMap(one, {0: np.array([[1.0, 2.0], [0.0, 1.0]]), 1: np.diag([3.0, 0.5])})
for kind in ("l1", "l2", "linf"):
    Tk = CondLinearMap(one, {a: T[a] for a in one}, kind, kind)
    print(f"||T|| ({kind}):", operator_norm(Tk))

# renorming: K = B_E = [-1, 1], x = 1
one1 = Algebra(1).one
K = SymmetricBody.box(one1, 1)
ref = renorm_sequence(K, K, CondVector.constant(one1, [1.0]), truncation=40)
print("||1||_C:", ref["norm_C"][0], " sum of squares:", ref["sum_squares"][0])

# the renormed body contains K and is compact
R = RenormBody(K, K, 40)
print("K inside C on:", body_inclusion(K, R)["included_condition"])
print("C compact on:", compactness_check(R)["compact_condition"])
