"""Concatenation, stable hulls and conditional reals on a three-atom algebra.

Run with ``python3 demos/stable_hull.py``.
"""

from condan.boolean_algebra import Algebra, make_partition
from condan.core import ConditionalValue, concatenate, stable_hull
from condan.numbers import CondReal, cond_inverse, sup_inf

alg = Algebra(3)
one = alg.one

# two "scenarios" that disagree atom by atom
x = ConditionalValue(one, {0: "low", 1: "low", 2: "high"})
y = ConditionalValue(one, {0: "high", 1: "mid", 2: "mid"})

# glue x on {0} with y on {1, 2}
p = make_partition(one, {0: "a", 1: "b", 2: "b"})
print("partition:", p)
print("x|{0} + y|{1,2}:", concatenate([x, y], p))

# every such gluing belongs to the stable hull
hull = stable_hull([x, y])
print("hull per atom:", {a: sorted(hull[a]) for a in one})
print("hull size:", hull.cardinality())

# conditional reals: the inverse lives on the support
r = CondReal(one, {0: 2.0, 1: 0.0, 2: -4.0})
print("r:", r)
print("r^-1:", cond_inverse(r))

# the supremum of a family is taken atom by atom
fam = stable_hull([CondReal(one, {0: 1.0, 1: 5.0, 2: 0.0}), CondReal(one, {0: 3.0, 1: 2.0, 2: -1.0})])
print("sup / inf:", sup_inf(fam))
