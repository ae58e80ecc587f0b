"""Metric and seminorm procedures on conditional sequences and sets.

Convergence and Cauchy tests, Bolzano-Weierstrass subsequence extraction,
total sets and the metric they induce, compactness certificates, finite
subcovers, Baire localization and uniform bounds for operator families.
"""

from __future__ import annotations

import itertools
import math
import warnings
from collections.abc import Callable, Mapping, Sequence

import numpy as np
from scipy import ndimage

from condan.boolean_algebra import Algebra, Condition, Partition
from condan.core import ConditionalValue, StableSet
from condan.errors import (
    ConditionMismatch,
    DimensionMismatch,
    EmptyFamily,
    HypothesisViolated,
    NotACover,
    ResolutionExhausted,
    UnboundedOnCondition,
    UncertifiedSet,
    Undecided,
    UnsupportedDimension,
    ZeroFunctional,
    NotTotalWarning,
)
from condan.linear import (
    CondLinearMap,
    CondNorm,
    CondVector,
    RenormBody,
    SymmetricBody,
    as_vector,
    concatenate_maps,
    lp_norm,
    norming_functional,
    operator_norm,
    sphere_net,
)
from condan.numbers import CondNat, CondReal


# --------------------------------------------------------------------------
# Sequences


class CondSequence:
    """A conditional sequence ``k -> x_k`` of vectors on one condition.

    ``stream`` is a list (``stream[0]`` is ``x_1``) or a callable taking
    ``k >= 1``.  Conditional reals are promoted to 1-dimensional vectors.
    Conditional indexing follows ``x_n[t] = x_{n[t]}[t]``.
    """

    def __init__(self, stream: Sequence | Callable[[int], ConditionalValue]):
        self._stream = stream
        self._cache: dict[int, CondVector] = {}
        self._table: dict[int, np.ndarray] | None = None
        self._length: int | None = None

    @classmethod
    def from_table(cls, on: Condition, table: Mapping[int, np.ndarray]) -> CondSequence:
        """Finite sequence given per atom as an array whose row ``k - 1`` is ``x_k``."""
        table = {a: np.asarray(table[a], dtype=float) for a in on}
        lengths = {len(T) for T in table.values()}
        if len(lengths) > 1:
            raise ValueError("per-atom tables must have the same length")
        for a in on:
            if table[a].ndim == 1:
                table[a] = table[a][:, None]
        seq = cls(lambda k: CondVector(on, {a: table[a][k - 1] for a in on}))
        seq._table = table
        seq._length = lengths.pop() if lengths else 0
        return seq

    def term(self, k: int) -> CondVector:
        if k < 1:
            raise ValueError("sequence indices start at 1")
        if k not in self._cache:
            if self._table is not None and k > self._length:
                raise IndexError(f"sequence has {self._length} terms")
            if callable(self._stream):
                x = self._stream(k)
            else:
                if k > len(self._stream):
                    raise IndexError(f"sequence has {len(self._stream)} terms")
                x = self._stream[k - 1]
            self._cache[k] = as_vector(x)
        return self._cache[k]

    __call__ = term

    @property
    def on(self) -> Condition:
        return self.term(1).on

    def at(self, n: CondNat) -> CondVector:
        """``x_n`` for a conditional index ``n``."""
        return CondVector(n.on, {a: self.term(n[a])[a] for a in n.on})

    def atom_terms(self, atom: int, budget: int) -> np.ndarray:
        if self._table is not None:
            if budget > self._length:
                raise IndexError(f"sequence has {self._length} terms")
            return self._table[atom][:budget]
        return np.array([self.term(k)[atom] for k in range(1, budget + 1)])

    def subsequence(self, indices: Sequence[CondNat]) -> CondSequence:
        return CondSequence([self.at(n) for n in indices])


def is_subsequence_index(indices: Sequence[CondNat]) -> bool:
    """``k < k'`` implies ``n_k < n_k'`` on every atom."""
    return all(a < b for a, b in zip(indices, indices[1:]))


# --------------------------------------------------------------------------
# Seminorms and metrics


class Seminorm:
    """A seminorm evaluated atom by atom on arrays of points."""

    def __init__(self, atom_eval: Callable[[int, np.ndarray], np.ndarray], label: str = "seminorm"):
        self.atom_eval = atom_eval
        self.label = label

    @classmethod
    def from_functional(cls, f: CondLinearMap) -> Seminorm:
        return cls(lambda a, P: np.abs(np.asarray(P) @ f[a][0]), "functional")

    @classmethod
    def from_norm(cls, norm: CondNorm | str) -> Seminorm:
        norm = CondNorm(norm) if isinstance(norm, str) else norm
        return cls(norm.atom_norm, norm.kind)

    @classmethod
    def from_body(cls, body: SymmetricBody) -> Seminorm:
        return cls(body.atom_gauge, "gauge")

    def __call__(self, x: CondVector) -> CondReal:
        return CondReal(x.on, {a: float(self.atom_eval(a, x[a])) for a in x.on})


def neighborhood_member(Q: Sequence[Seminorm], r: CondReal | float, center: CondVector, x: CondVector) -> dict:
    """Atoms where ``sup_{p in Q} p(x - center) <= r``."""
    if not Q:
        raise EmptyFamily("the seminorm family is empty")
    diff = x - center
    member = []
    for a in x.on:
        val = max(float(p.atom_eval(a, diff[a])) for p in Q)
        rad = float(r[a]) if isinstance(r, ConditionalValue) else float(r)
        if rad <= 0:
            raise ValueError("neighbourhood radius must be strictly positive")
        if val <= rad:
            member.append(a)
    return {"member_condition": x.algebra.condition(member)}


class CondMetric:
    """Translation-invariant conditional metric ``d(x, y) = length(x - y)``.

    ``atom_length(atom, diffs)`` evaluates the length of the rows of
    ``diffs``; ``kind`` tags how the metric was built.
    """

    def __init__(self, atom_length: Callable[[int, np.ndarray], np.ndarray], kind: str):
        self.atom_length = atom_length
        self.kind = kind
        self.total_condition: Condition | None = None

    @classmethod
    def from_norm(cls, norm: CondNorm | str = "l2") -> CondMetric:
        norm = CondNorm(norm) if isinstance(norm, str) else norm
        return cls(norm.atom_norm, f"norm:{norm.kind}")

    def __call__(self, x: CondVector, y: CondVector) -> CondReal:
        diff = x - y
        return CondReal(x.on, {a: float(self.atom_length(a, diff[a])) for a in x.on})

    def atom_distance(self, atom: int, P: np.ndarray, Q: np.ndarray) -> np.ndarray:
        return self.atom_length(atom, np.asarray(P) - np.asarray(Q))

    def atom_diameter(self, atom: int, P: np.ndarray) -> float:
        P = np.asarray(P, dtype=float)
        if len(P) < 2:
            return 0.0
        best = 0.0
        # blockwise to bound memory
        for i in range(0, len(P), 256):
            D = self.atom_length(atom, P[i : i + 256, None, :] - P[None, :, :])
            best = max(best, float(D.max()))
        return best


def seminorm_metric(functionals: Sequence[CondLinearMap], norm: CondNorm | str = "l2") -> CondMetric:
    """``d(x, y) = sum_n 2**-n |x*_n(x - y)| / ||x*_n||`` over the finite list.

    Warns with :class:`NotTotalWarning` on atoms where the functionals do
    not separate points; ``total_condition`` records where they do.
    """
    norm = CondNorm(norm) if isinstance(norm, str) else norm
    if not functionals:
        raise EmptyFamily("no functionals")
    on = functionals[0].on
    rows: dict[int, np.ndarray] = {}
    total = []
    for a in on:
        F = np.vstack([f[a] for f in functionals])
        norms = np.atleast_1d(norm.atom_dual_norm(a, F))
        if np.any(norms <= 0):
            raise ZeroFunctional(f"functional with zero norm on atom {a}")
        weights = 2.0 ** -np.arange(1, len(F) + 1)
        rows[a] = F * (weights / norms)[:, None]
        if np.linalg.matrix_rank(F) == F.shape[1]:
            total.append(a)
    total_cond = on.algebra.condition(total)
    if total_cond != on:
        warnings.warn(
            f"functionals are not total on atoms {sorted((on - total_cond).atoms)}",
            NotTotalWarning,
            stacklevel=2,
        )

    def length(a, D):
        return np.abs(np.asarray(D) @ rows[a].T).sum(axis=-1)

    metric = CondMetric(length, "seminorm-series")
    metric.total_condition = total_cond
    return metric


def total_set(points: Sequence[CondVector], norm: CondNorm | str = "l2", resolution: float = 0.02) -> dict:
    """Norming functionals of ``points`` and a grid test that they separate points.

    The family is declared total on an atom when no unit vector of a
    ``resolution``-net of the sphere makes every functional smaller than
    the net's own error ``resolution * max ||x*_n||``; otherwise the best
    near-annihilator is returned as witness.
    """
    norm = CondNorm(norm) if isinstance(norm, str) else norm
    if not points:
        raise EmptyFamily("no points")
    functionals = [norming_functional(p, norm) for p in points]
    on = points[0].on
    total, witness = [], {}
    for a in on:
        F = np.vstack([f[a] for f in functionals])
        d = F.shape[1]
        if d > 3:
            raise UnsupportedDimension("sphere grid search limited to dimension 3")
        S = sphere_net(d, resolution / 2)
        S = S / lp_norm(norm.kind, S)[:, None]
        vals = np.abs(S @ F.T).max(axis=1)
        i = int(np.argmin(vals))
        threshold = resolution * float(np.abs(F).sum(axis=1).max())
        if vals[i] > threshold:
            total.append(a)
        else:
            witness[a] = S[i]
    total_cond = on.algebra.condition(total)
    return {
        "functionals": functionals,
        "is_total": total_cond == on,
        "total_condition": total_cond,
        "witness": witness,
    }


# --------------------------------------------------------------------------
# Cauchy sequences and limits


def _cauchy_classify(seq: CondSequence, metric: CondMetric, tol: float, budget: int) -> dict:
    if budget < 8:
        raise ValueError("budget must be at least 8")
    half, three_q = budget // 2, (3 * budget) // 4
    cauchy, witnessed = [], []
    for a in seq.on:
        P = seq.atom_terms(a, budget)
        tail = metric.atom_diameter(a, P[half:])
        if tail <= tol:
            cauchy.append(a)
            continue
        mid = metric.atom_diameter(a, P[half:three_q])
        last = metric.atom_diameter(a, P[three_q:])
        # persistent oscillation above tol over two consecutive windows
        if last > tol and last >= 0.9 * mid:
            witnessed.append(a)
    alg = seq.on.algebra
    c, w = alg.condition(cauchy), alg.condition(witnessed)
    return {"cauchy_condition": c, "non_cauchy_condition": w, "undecided_condition": seq.on - c - w}


def is_cauchy(seq: CondSequence, tol: float = 1e-6, budget: int = 1000, metric: CondMetric | None = None) -> dict:
    """Atoms where the sequence passes the Cauchy criterion within ``budget`` terms.

    An atom passes when the tail ``x_{budget/2+1..budget}`` has diameter at
    most ``tol``.  It is witnessed non-Cauchy when the last two quarter
    windows keep a diameter above ``tol`` without shrinking.  Any other atom
    is undecided and :class:`Undecided` is raised, carrying the partial
    classification.
    """
    metric = metric or CondMetric.from_norm("l2")
    out = _cauchy_classify(seq, metric, tol, budget)
    if not out["undecided_condition"].is_zero:
        raise Undecided(f"budget {budget} exhausted on {out['undecided_condition']}", out)
    return out


def limit(seq: CondSequence, metric: CondMetric | None = None, tol: float = 1e-6, budget: int = 1000) -> CondVector | None:
    """The conditional limit when the Cauchy test passes on every atom, else ``None``.

    The returned estimate is ``x_budget``, within ``tol`` of every later
    examined term.  Raises :class:`Undecided` when no decision is reached.
    """
    out = is_cauchy(seq, tol, budget, metric)
    if out["cauchy_condition"] != seq.on:
        return None
    return seq.term(budget)


# --------------------------------------------------------------------------
# Bolzano-Weierstrass


def _bounding_box(region, atom: int) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(region, SymmetricBody):
        d = region.dim(atom)
        h = region.atom_support(atom, np.eye(d))
        return -h, h
    if isinstance(region, IntervalProduct):
        return region.lo[atom], region.hi[atom]
    raise TypeError(f"unsupported region {type(region).__name__}")


def _region_gauge(region, atom: int, P: np.ndarray) -> np.ndarray:
    if isinstance(region, IntervalProduct):
        inside = region.atom_contains(atom, P)
        return np.where(inside, 0.0, np.inf)
    return region.atom_gauge(atom, P)


def _bisect_atom(P: np.ndarray, lo: np.ndarray, hi: np.ndarray, max_depth: int):
    """Indices (0-based) and the boxes of the nested bisection on one atom."""
    d = P.shape[1]
    corners = np.array(list(itertools.product((0, 1), repeat=d)), dtype=bool)
    lo, hi = lo.astype(float).copy(), hi.astype(float).copy()
    candidates = np.arange(len(P))
    chosen: list[int] = []
    sides: list[float] = []
    for _ in range(max_depth):
        if candidates.size == 0:
            break
        mid = (lo + hi) / 2
        upper = P[candidates] >= mid  # lower half is [lo, mid), upper is [mid, hi]
        best = None
        for corner in corners:
            mask = np.all(upper == corner, axis=1)
            idx = candidates[mask]
            if idx.size == 0:
                continue
            key = (-idx.size, int(idx[0]))
            if best is None or key < best[0]:
                best = (key, corner, idx)
        _, corner, idx = best
        lo = np.where(corner, mid, lo)
        hi = np.where(corner, hi, mid)
        n = int(idx[0])
        chosen.append(n)
        sides.append(float((hi - lo).max()))
        candidates = idx[idx > n]
    return chosen, sides


def extract_convergent_subsequence(
    seq: CondSequence,
    region,
    budget: int = 1024,
    max_depth: int = 30,
    tol: float = 1e-9,
) -> dict:
    """Conditional subsequence converging in a bounded region, by nested bisection.

    On each atom the bounding box of ``region`` is split into ``2**d``
    sub-boxes; the one holding the most remaining terms (ties: the smallest
    first index) is kept and its first index beyond the previous choice is
    the next ``n_k``.  ``error_bounds[k]`` is the side of the level-``k``
    box, which bounds ``|x_{n_k} - limit|_inf``.  The limit estimate is the
    deepest chosen term.  Terms outside ``region`` raise
    :class:`UnboundedOnCondition` on the atoms where that happens.
    """
    on = seq.on
    escaped, witness = [], {}
    terms = {}
    for a in on:
        P = seq.atom_terms(a, budget)
        g = _region_gauge(region, a, P)
        bad = np.flatnonzero(g > 1.0 + tol)
        if bad.size:
            escaped.append(a)
            witness[a] = int(bad[0]) + 1
        terms[a] = P
    if escaped:
        raise UnboundedOnCondition(on.algebra.condition(escaped), witness)
    chosen, sides = {}, {}
    for a in on:
        lo, hi = _bounding_box(region, a)
        chosen[a], sides[a] = _bisect_atom(terms[a], lo, hi, max_depth)
    depth = min(len(c) for c in chosen.values())
    indices = [CondNat(on, {a: chosen[a][k] + 1 for a in on}) for k in range(depth)]
    bounds = [CondReal(on, {a: sides[a][k] for a in on}) for k in range(depth)]
    lim = CondVector(on, {a: terms[a][chosen[a][-1]] for a in on})
    return {
        "indices": indices,
        "limit": lim,
        "error_bounds": bounds,
        "depth": CondNat(on, {a: len(chosen[a]) for a in on}),
    }


# --------------------------------------------------------------------------
# Closed sets with certificates


class ClosedSet:
    """Base class for membership oracles whose closedness is certified by form."""

    kind = "closed"

    def atom_contains(self, atom: int, points: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def contains(self, x: CondVector) -> Condition:
        return x.algebra.condition(a for a in x.on if bool(self.atom_contains(a, x[a][None, :])[0]))


class IntervalProduct(ClosedSet):
    """Closed box ``prod [lo_i, hi_i]`` on every atom."""

    kind = "interval_product"

    def __init__(self, lo: CondVector, hi: CondVector, atol: float = 1e-12):
        if lo.on != hi.on:
            raise ConditionMismatch("bounds live on different conditions")
        for a in lo.on:
            if lo[a].shape != hi[a].shape or np.any(lo[a] > hi[a]):
                raise ValueError(f"invalid box on atom {a}")
        self.lo, self.hi, self.on, self.atol = lo, hi, lo.on, atol

    def atom_contains(self, atom, points):
        P = np.asarray(points, dtype=float)
        return np.all((P >= self.lo[atom] - self.atol) & (P <= self.hi[atom] + self.atol), axis=-1)

    def to_json(self) -> dict:
        return {"kind": self.kind, "lo": self.lo.to_json(), "hi": self.hi.to_json()}


class HPolytope(ClosedSet):
    """Closed polyhedron ``{x : A x <= b}`` on every atom."""

    kind = "hbody"

    def __init__(self, on: Condition, per_atom: Mapping[int, tuple], atol: float = 1e-12):
        self.on = on
        self.atol = atol
        self._data = {a: (np.asarray(A, float), np.asarray(b, float)) for a, (A, b) in per_atom.items()}
        if set(self._data) != set(on.atoms):
            raise ConditionMismatch("polytope data must cover the condition exactly")

    @classmethod
    def from_body(cls, body: SymmetricBody, shift: CondVector | None = None) -> HPolytope:
        data = {}
        for a in body.on:
            U, c = body.directions(a), body.offsets(a)
            A = np.vstack([U, -U])
            b = np.concatenate([c, c])
            if shift is not None:
                b = b + A @ shift[a]
            data[a] = (A, b)
        return cls(body.on, data)

    def atom_contains(self, atom, points):
        A, b = self._data[atom]
        return np.all(np.asarray(points, float) @ A.T <= b + self.atol, axis=-1)

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "on": self.on.to_json(),
            "per_atom": {str(a): {"A": A.tolist(), "b": b.tolist()} for a, (A, b) in self._data.items()},
        }


class FiniteUnion(ClosedSet):
    kind = "finite_union"

    def __init__(self, parts: Sequence[ClosedSet]):
        if not parts:
            raise EmptyFamily("empty union")
        for p in parts:
            _require_certified(p)
        self.parts = list(parts)
        self.on = parts[0].on

    def atom_contains(self, atom, points):
        out = self.parts[0].atom_contains(atom, points)
        for p in self.parts[1:]:
            out = out | p.atom_contains(atom, points)
        return out

    def to_json(self) -> dict:
        return {"kind": self.kind, "parts": [p.to_json() for p in self.parts]}


def closed_set_from_json(algebra: Algebra, data: Mapping) -> ClosedSet:
    kind = data["kind"]
    if kind == "interval_product":
        return IntervalProduct(
            CondVector.from_json(algebra, data["lo"]), CondVector.from_json(algebra, data["hi"])
        )
    if kind == "hbody":
        on = algebra.condition(data["on"])
        return HPolytope(on, {int(k): (v["A"], v["b"]) for k, v in data["per_atom"].items()})
    if kind == "finite_union":
        return FiniteUnion([closed_set_from_json(algebra, p) for p in data["parts"]])
    raise ValueError(f"unknown closed set kind {kind!r}")


def _require_certified(s) -> None:
    if not isinstance(s, (IntervalProduct, HPolytope, FiniteUnion)):
        raise UncertifiedSet(
            f"{type(s).__name__} carries no closedness certificate; "
            "use IntervalProduct, HPolytope or FiniteUnion"
        )


# --------------------------------------------------------------------------
# Compactness


def compactness_check(K) -> dict:
    """Atoms where ``K`` is closed and bounded, hence conditionally compact.

    Bodies are closed by representation and bounded where their directions
    span; finite point sets are compact on their condition.
    """
    if isinstance(K, (SymmetricBody, RenormBody)):
        return {"compact_condition": K.bounded_condition()}
    if isinstance(K, IntervalProduct):
        return {"compact_condition": K.on}
    if isinstance(K, StableSet):
        return {"compact_condition": K.on}
    if isinstance(K, Sequence) and K and isinstance(K[0], ConditionalValue):
        return {"compact_condition": K[0].on}
    raise TypeError(f"cannot certify compactness of {type(K).__name__}")


def _grid_in_body(K: SymmetricBody, atom: int, resolution: float) -> np.ndarray:
    d = K.dim(atom)
    V = K.vertices(atom)
    lo, hi = V.min(axis=0), V.max(axis=0)
    axes = [np.linspace(l, h, max(2, int(math.ceil((h - l) / resolution)) + 1)) for l, h in zip(lo, hi)]
    G = np.array(list(itertools.product(*axes))) if d > 1 else axes[0][:, None]
    G = G[K.atom_gauge(atom, G) <= 1.0 + 1e-12]
    return np.vstack([G, V])


def extract_finite_subcover(
    K: SymmetricBody | IntervalProduct,
    cover: Sequence[tuple[CondVector, CondReal]],
    resolution: float = 0.01,
    norm: CondNorm | str = "l2",
) -> dict:
    """Greedy conditionally finite subfamily of open balls covering a grid of ``K``.

    ``cover[i] = (center, radius)`` is an open ball on every atom.  On each
    atom the ball covering the most uncovered grid points (ties: smallest
    index) is taken until the grid is covered.  ``selected`` lists 1-based
    conditional indices; atoms needing fewer balls repeat their first one.
    """
    norm = CondNorm(norm) if isinstance(norm, str) else norm
    if not cover:
        raise EmptyFamily("empty cover")
    on = K.on
    picks: dict[int, list[int]] = {}
    for a in on:
        if isinstance(K, IntervalProduct):
            lo, hi = K.lo[a], K.hi[a]
            axes = [np.linspace(l, h, max(2, int(math.ceil((h - l) / resolution)) + 1)) for l, h in zip(lo, hi)]
            G = np.array(list(itertools.product(*axes)))
        else:
            G = _grid_in_body(K, a, resolution)
        covered_by = np.array(
            [norm.atom_norm(a, G - c[a]) < float(r[a]) for c, r in cover]
        )  # balls x points
        hit = covered_by.any(axis=0)
        if not hit.all():
            raise NotACover(G[int(np.argmin(hit))], a)
        remaining = np.ones(len(G), dtype=bool)
        chosen = []
        while remaining.any():
            gains = (covered_by & remaining).sum(axis=1)
            i = int(np.argmax(gains))  # first maximal: smallest index on ties
            chosen.append(i)
            remaining &= ~covered_by[i]
        picks[a] = sorted(chosen)
    top = max(len(p) for p in picks.values())
    selected = [
        CondNat(on, {a: (picks[a][k] if k < len(picks[a]) else picks[a][0]) + 1 for a in on})
        for k in range(top)
    ]
    return {"selected": selected, "count": CondNat(on, {a: len(p) for a, p in picks.items()})}


# --------------------------------------------------------------------------
# Baire localization


def _ball_grid(center: np.ndarray, radius: float, spacing: float, norm: CondNorm, atom: int) -> np.ndarray:
    d = center.size
    steps = max(2, int(math.ceil(2 * radius / spacing)) + 1)
    axes = [np.linspace(c - radius, c + radius, steps) for c in center]
    G = np.array(list(itertools.product(*axes))) if d > 1 else axes[0][:, None]
    if norm.kind != "linf":
        G = G[norm.atom_norm(atom, G - center) <= radius * (1 + 1e-12)]
    return G


def _initial_ball(space, atom: int, norm: CondNorm) -> tuple[np.ndarray, float]:
    if isinstance(space, SymmetricBody):
        return np.zeros(space.dim(atom)), space.inradius(atom, norm.kind)
    if isinstance(space, IntervalProduct):
        lo, hi = space.lo[atom], space.hi[atom]
        return (lo + hi) / 2, float((hi - lo).min()) / 2
    raise TypeError(f"unsupported space {type(space).__name__}")


def _space_grid(space, atom: int, spacing: float) -> np.ndarray:
    if isinstance(space, SymmetricBody):
        return _grid_in_body(space, atom, spacing)
    lo, hi = space.lo[atom], space.hi[atom]
    axes = [np.linspace(l, h, max(2, int(math.ceil((h - l) / spacing)) + 1)) for l, h in zip(lo, hi)]
    return np.array(list(itertools.product(*axes)))


def _disjoint_subball(center, radius, E: ClosedSet, atom, spacing, norm: CondNorm, later: Sequence[ClosedSet] = ()):
    """Sub-ball (radius ``radius/2**j``) whose sampled points all avoid ``E``.

    Returns ``(center, radius, m)``.  A sub-ball lying inside one of the
    ``later`` sets is preferred at any radius (``m`` is its 0-based position
    there); otherwise the largest radius is taken with ``m = None``, placed
    with the most clearance from ``E``.
    """
    d = center.size
    steps = max(3, int(math.ceil(2 * radius / spacing)) + 1)
    axes = [np.linspace(c - radius, c + radius, steps) for c in center]
    h = 2 * radius / (steps - 1)
    mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)
    flat = mesh.reshape(-1, d)
    shape = mesh.shape[:-1]
    outside = (~E.atom_contains(atom, flat)).reshape(shape)
    inside_later = [F.atom_contains(atom, flat).reshape(shape) for F in later]
    dist = norm.atom_norm(atom, flat - center).reshape(shape)
    clearance = ndimage.distance_transform_edt(outside) if not outside.all() else -dist
    fallback = None
    rho = radius / 2
    while rho >= h:
        w = int(math.floor(rho / h + 1e-9))
        offs = np.array(list(itertools.product(range(-w, w + 1), repeat=d))) * h
        footprint = (norm.atom_norm(atom, offs) <= rho * (1 + 1e-12)).reshape((2 * w + 1,) * d)

        def fits(mask):
            return ndimage.minimum_filter(mask.astype(np.uint8), footprint=footprint, mode="constant", cval=0).astype(bool)

        ok = fits(outside) & (dist + rho <= radius * (1 + 1e-12))
        if ok.any():
            for m, mask in enumerate(inside_later):
                hit = ok & fits(mask)
                if hit.any():
                    i = np.unravel_index(int(np.argmax(hit)), shape)
                    return mesh[i], rho, m
            if fallback is None:
                # most clearance from E leaves room for the next step
                i = np.unravel_index(int(np.argmax(np.where(ok, clearance, -1.0))), shape)
                fallback = (mesh[i], rho, None)
        rho /= 2
    return fallback


def _baire_atom(space, sets: Sequence[ClosedSet], atom: int, schedule: Sequence[float], norm: CondNorm, verify_factor: int):
    deepest: list = []

    def verified(center, radius, E, h):
        return E.atom_contains(atom, _ball_grid(center, radius, h / verify_factor, norm, atom)).all()

    for h in schedule:
        center, radius = _initial_ball(space, atom, norm)
        trace = [{"step": 0, "center": center.tolist(), "radius": radius}]
        for n, E in enumerate(sets, start=1):
            pts = _ball_grid(center, radius, h, norm, atom)
            if E.atom_contains(atom, pts).all() and verified(center, radius, E, h):
                return center, radius, n, trace
            sub = _disjoint_subball(center, radius, E, atom, h, norm, sets[n:])
            if sub is None:
                break
            center, radius, m = sub
            trace.append({"step": n, "center": center.tolist(), "radius": radius})
            # one-step lookahead: the sub-ball already sits inside a later set
            if m is not None and verified(center, radius, sets[n + m], h):
                return center, radius, n + m + 1, trace
        if len(trace) > len(deepest):
            deepest = trace
    raise ResolutionExhausted(f"no ball found on atom {atom} within the schedule", deepest)


def baire_locate(
    space: SymmetricBody | IntervalProduct,
    closed_sets: Sequence[ClosedSet],
    schedule: Sequence[float] | None = None,
    norm: CondNorm | str = "linf",
    verify_factor: int = 10,
) -> dict:
    """A closed ball inside one of the closed sets covering ``space``.

    Follows the nested-ball construction: starting from a ball inscribed in
    ``space``, step ``n`` either finds the current ball inside ``E_n`` or
    shrinks to a sub-ball avoiding ``E_n``.  Because the ``E_n`` cover the
    space the construction stops inside some ``E_n``.  Membership is sampled
    at each spacing of ``schedule``; a ball is returned only after a check at
    ``verify_factor`` times finer spacing.
    """
    norm = CondNorm(norm) if isinstance(norm, str) else norm
    if not closed_sets:
        raise EmptyFamily("no closed sets")
    for s in closed_sets:
        _require_certified(s)
    on = space.on
    centers, radii, index, traces = {}, {}, {}, {}
    for a in on:
        c0, r0 = _initial_ball(space, a, norm)
        scale = 2 * r0 if r0 > 0 else 1.0
        sched = list(schedule) if schedule is not None else [scale * 2.0**-k for k in range(3, 9)]
        G = _space_grid(space, a, sched[0] / 2)
        hit = np.zeros(len(G), dtype=bool)
        for E in closed_sets:
            hit |= E.atom_contains(a, G)
        if not hit.all():
            raise NotACover(G[int(np.argmin(hit))], a)
        c, r, n, trace = _baire_atom(space, closed_sets, a, sched, norm, verify_factor)
        centers[a], radii[a], index[a], traces[a] = c, r, n, trace
    return {
        "center": CondVector(on, centers),
        "radius": CondReal(on, radii),
        "index": CondNat(on, index),
        "trace": traces,
    }


def verify_ball(
    center: CondVector, radius: CondReal, index: CondNat, closed_sets: Sequence[ClosedSet],
    spacing: CondReal | float, norm: CondNorm | str = "linf",
) -> int:
    """Number of sample points of the ball lying outside ``E_index`` (0 means verified)."""
    norm = CondNorm(norm) if isinstance(norm, str) else norm
    bad = 0
    for a in center.on:
        h = float(spacing[a]) if isinstance(spacing, ConditionalValue) else float(spacing)
        pts = _ball_grid(center[a], float(radius[a]), h, norm, a)
        bad += int((~closed_sets[index[a] - 1].atom_contains(a, pts)).sum())
    return bad


# --------------------------------------------------------------------------
# Uniform boundedness


def uniform_bound(
    generators: Sequence[CondLinearMap],
    pointwise_bound: Callable[[CondVector], CondReal] | None = None,
    samples: int = 64,
    seed: int = 0,
) -> dict:
    """``s`` with ``||T|| <= s`` for every ``T`` in the stable hull of ``generators``.

    The hull's operator norms are the concatenations of the generators'
    norms, so the conditional supremum is their per-atom maximum.  When a
    pointwise bound is supplied it is checked on sampled vectors first.
    """
    if not generators:
        raise EmptyFamily("no generators")
    on = generators[0].on
    for T in generators:
        if T.on != on:
            raise ConditionMismatch("generators live on different conditions")
    if pointwise_bound is not None:
        rng = np.random.default_rng(seed)
        for _ in range(samples):
            x = CondVector(on, {a: rng.standard_normal(generators[0][a].shape[1]) for a in on})
            bound = pointwise_bound(x)
            for i, T in enumerate(generators):
                val = T.codomain(T(x))
                for a in on:
                    if val[a] > bound[a] * (1 + 1e-12) + 1e-12:
                        raise HypothesisViolated(
                            f"generator {i + 1} exceeds the pointwise bound on atom {a}",
                            {"generator": i + 1, "atom": a, "x": x[a].tolist(), "value": val[a], "bound": bound[a]},
                        )
    norms = [operator_norm(T) for T in generators]
    s = CondReal(on, {a: max(nrm[a] for nrm in norms) for a in on})
    return {"s": s}


def hull_members(generators: Sequence[CondLinearMap]):
    """Every concatenation of the generators over the atom partition (``len**m`` maps)."""
    on = generators[0].on
    atoms = list(on)
    part = Partition(on, [on.algebra.atom(a) for a in atoms])
    for choice in itertools.product(range(len(generators)), repeat=len(atoms)):
        yield concatenate_maps([generators[i] for i in choice], part)
