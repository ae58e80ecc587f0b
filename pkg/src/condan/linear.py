"""Conditionally finitely generated normed spaces.

Vectors, norms, symmetric polytopes, gauge functionals, linear maps and
their operator norms, norming functionals, the natural embedding into the
bidual, the l2 direct sum and the renorming built from the bodies
``2**n K + 2**-n B_E``.

Everything is computed atom by atom.  A symmetric body on an atom is the
H-polytope ``{x : |<u_j, x>| <= c_j for all j}`` with ``c_j > 0``.
"""

from __future__ import annotations

import functools
import itertools
import math
from collections.abc import Callable, Mapping, Sequence
from dataclasses import dataclass
from typing import Union

import numpy as np
from scipy.optimize import linprog
from scipy.spatial import HalfspaceIntersection

from condan.boolean_algebra import Algebra, Condition
from condan.core import ConditionalValue
from condan.errors import (
    ConditionMismatch,
    DimensionMismatch,
    GridMismatch,
    InvalidAssignment,
    NotBounded,
    NotInjective,
    UncertifiedTail,
    UnsupportedDimension,
    UnsupportedNormKind,
)
from condan.numbers import CondNat, CondReal

#: Largest per-atom dimension for which vertices are enumerated.
VERTEX_DIM_CAP = 4
#: Extra random directions added to the canonical direction grid.
DEFAULT_EXTRA_DIRECTIONS = 16

ANALYTIC_KINDS = ("l1", "l2", "linf")
_DUAL_KIND = {"l1": "linf", "l2": "l2", "linf": "l1"}


def _frozen_array(v) -> np.ndarray:
    arr = np.array(v, dtype=float)
    arr.setflags(write=False)
    return arr


def lp_norm(kind: str, arr: np.ndarray, axis: int = -1) -> np.ndarray:
    """Vectorised l1 / l2 / linf norm along ``axis``."""
    arr = np.asarray(arr, dtype=float)
    if arr.shape[axis] == 0:
        return np.zeros(np.delete(arr.shape, axis % arr.ndim))
    if kind == "l1":
        return np.abs(arr).sum(axis=axis)
    if kind == "l2":
        return np.sqrt((arr * arr).sum(axis=axis))
    if kind == "linf":
        return np.abs(arr).max(axis=axis)
    raise UnsupportedNormKind(f"no analytic formula for norm kind {kind!r}")


class CondVector(ConditionalValue):
    """Conditional vector: a real vector on every atom, lengths may differ."""

    __slots__ = ()

    @staticmethod
    def _coerce(payload):
        arr = _frozen_array(payload)
        if arr.ndim != 1 or arr.size == 0:
            raise DimensionMismatch(f"expected a nonempty 1-d vector, got shape {arr.shape}")
        return arr

    @property
    def dims(self) -> CondNat:
        return CondNat(self.on, {a: v.size for a, v in self.items()})

    def dim(self, atom: int) -> int:
        return self[atom].size

    @classmethod
    def zeros(cls, on: Condition, dims) -> CondVector:
        return cls(on, {a: np.zeros(_atom_dim(dims, a)) for a in on})

    def _binary(self, other, op) -> CondVector:
        if isinstance(other, CondVector):
            self._same_on(other)
            for a in self.on:
                if self[a].shape != other[a].shape:
                    raise DimensionMismatch(f"dimensions differ on atom {a}")
            return CondVector(self.on, {a: op(v, other[a]) for a, v in self.items()})
        if isinstance(other, ConditionalValue):
            self._same_on(other)
            return CondVector(self.on, {a: op(v, other[a]) for a, v in self.items()})
        return CondVector(self.on, {a: op(v, other) for a, v in self.items()})

    def __add__(self, other):
        return self._binary(other, np.add)

    def __sub__(self, other):
        return self._binary(other, np.subtract)

    def __mul__(self, r):
        if isinstance(r, CondVector):
            raise TypeError("use dot() for vector products")
        return self._binary(r, np.multiply)

    __rmul__ = __mul__

    def __neg__(self):
        return CondVector(self.on, {a: -v for a, v in self.items()})

    def dot(self, other: CondVector) -> CondReal:
        self._same_on(other)
        return CondReal(self.on, {a: float(v @ other[a]) for a, v in self.items()})

    def norm(self, kind: str = "l2") -> CondReal:
        return CondNorm(kind)(self)


def _atom_dim(dims, atom: int) -> int:
    if isinstance(dims, ConditionalValue):
        return int(dims[atom])
    if isinstance(dims, Mapping):
        return int(dims[atom])
    return int(dims)


def as_vector(x) -> CondVector:
    """View a conditional real as a conditional vector of dimension 1."""
    if isinstance(x, CondVector):
        return x
    if isinstance(x, ConditionalValue):
        return CondVector(x.on, {a: [v] for a, v in x.items()})
    raise TypeError(f"cannot view {type(x).__name__} as a conditional vector")


# --------------------------------------------------------------------------
# Symmetric bodies


def direction_grid(dim: int, extra: int = DEFAULT_EXTRA_DIRECTIONS, seed: int = 0) -> np.ndarray:
    """Standard basis of ``R**dim`` followed by ``extra`` random unit directions.

    Each row ``u`` stands for the pair ``+-u``.  The grid only depends on
    ``(dim, extra, seed)``.
    """
    basis = np.eye(dim)
    if extra <= 0 or dim == 1:
        return basis
    rng = np.random.default_rng([seed, dim, extra])
    rand = rng.standard_normal((extra, dim))
    rand /= np.linalg.norm(rand, axis=1, keepdims=True)
    return np.vstack([basis, rand])


class SymmetricBody:
    """Symmetric convex polytope ``{x : |U x| <= c}`` on every atom of ``on``.

    Bodies whose directions do not span are allowed (they are slabs, closed
    but unbounded); :meth:`bounded_condition` reports where the body is
    bounded.  ``tight`` records that every offset equals the support value
    of the body in its direction, which Minkowski combination relies on.
    """

    def __init__(self, on: Condition, per_atom: Mapping[int, tuple], tight: bool = False):
        if set(per_atom) != set(on.atoms):
            raise InvalidAssignment(
                f"body given on atoms {sorted(per_atom)}, condition is {sorted(on.atoms)}"
            )
        self.on = on
        self._data: dict[int, tuple[np.ndarray, np.ndarray]] = {}
        for a in sorted(per_atom):
            U, c = per_atom[a]
            U = _frozen_array(U)
            c = _frozen_array(c)
            if U.ndim != 2 or c.ndim != 1 or U.shape[0] != c.shape[0] or U.shape[0] == 0:
                raise DimensionMismatch(f"atom {a}: directions {U.shape} vs offsets {c.shape}")
            if np.any(c <= 0) or not np.all(np.isfinite(c)):
                raise ValueError(f"atom {a}: offsets must be finite and strictly positive")
            self._data[a] = (U, c)
        self.tight = tight
        self._vertex_cache: dict[int, np.ndarray] = {}
        self._support_cache: dict[int, np.ndarray] = {}

    @property
    def algebra(self) -> Algebra:
        return self.on.algebra

    def directions(self, atom: int) -> np.ndarray:
        return self._data[atom][0]

    def offsets(self, atom: int) -> np.ndarray:
        return self._data[atom][1]

    def dim(self, atom: int) -> int:
        return self._data[atom][0].shape[1]

    @property
    def dims(self) -> CondNat:
        return CondNat(self.on, {a: self.dim(a) for a in self.on})

    # construction -----------------------------------------------------

    @classmethod
    def from_support(
        cls,
        on: Condition,
        grids: Mapping[int, np.ndarray] | np.ndarray,
        support: Callable[[int, np.ndarray], np.ndarray],
    ) -> SymmetricBody:
        """Body with offsets ``support(atom, U)`` on the given direction grids."""
        data = {}
        for a in on:
            U = np.asarray(grids[a] if isinstance(grids, Mapping) else grids, dtype=float)
            data[a] = (U, np.asarray(support(a, U), dtype=float))
        return cls(on, data, tight=True)

    @classmethod
    def box(cls, on: Condition, dim, radius=1.0, grids=None) -> SymmetricBody:
        """The l-infinity ball of the given radius, whose support is ``radius*|u|_1``."""
        grids = grids if grids is not None else {a: np.eye(_atom_dim(dim, a)) for a in on}
        return cls.from_support(on, grids, lambda a, U: _atom_scalar(radius, a) * lp_norm("l1", U))

    @classmethod
    def cross_polytope(cls, on: Condition, dim, radius=1.0, grids=None) -> SymmetricBody:
        """The l1 ball; its support is ``radius*|u|_inf``."""
        if grids is None:
            grids = {a: _sign_rows(_atom_dim(dim, a)) for a in on}
        return cls.from_support(on, grids, lambda a, U: _atom_scalar(radius, a) * lp_norm("linf", U))

    @classmethod
    def euclidean(cls, on: Condition, dim, radius=1.0, grids=None) -> SymmetricBody:
        """Outer polytope of the Euclidean ball on the direction grid."""
        grids = grids if grids is not None else {a: direction_grid(_atom_dim(dim, a)) for a in on}
        return cls.from_support(on, grids, lambda a, U: _atom_scalar(radius, a) * lp_norm("l2", U))

    def scaled(self, r) -> SymmetricBody:
        return SymmetricBody(
            self.on,
            {a: (U, _atom_scalar(r, a) * c) for a, (U, c) in self._data.items()},
            tight=self.tight,
        )

    # geometry ---------------------------------------------------------

    def atom_gauge(self, atom: int, points: np.ndarray) -> np.ndarray:
        """Gauge of the body at the rows of ``points`` (or at one point)."""
        U, c = self._data[atom]
        pts = np.asarray(points, dtype=float)
        if pts.shape[-1] != U.shape[1]:
            raise DimensionMismatch(
                f"atom {atom}: points of dimension {pts.shape[-1]}, body dimension {U.shape[1]}"
            )
        return (np.abs(pts @ U.T) / c).max(axis=-1)

    def gauge(self, x: CondVector) -> CondReal:
        return gauge(self, x)

    def contains(self, x: CondVector, tol: float = 0.0) -> Condition:
        """Atoms of ``x.on`` where ``x`` lies in the body."""
        g = gauge(self, x)
        return self.algebra.condition(a for a in x.on if g[a] <= 1.0 + tol)

    def bounded_on_atom(self, atom: int, tol: float = 1e-12) -> bool:
        U = self._data[atom][0]
        return np.linalg.matrix_rank(U, tol=tol * max(1.0, np.abs(U).max())) == U.shape[1]

    def bounded_condition(self) -> Condition:
        return self.algebra.condition(a for a in self.on if self.bounded_on_atom(a))

    def vertices(self, atom: int) -> np.ndarray:
        """Vertices of the polytope on ``atom`` (rows), dimension at most 4."""
        if atom in self._vertex_cache:
            return self._vertex_cache[atom]
        U, c = self._data[atom]
        d = U.shape[1]
        if d > VERTEX_DIM_CAP:
            raise UnsupportedDimension(f"vertex enumeration capped at dimension {VERTEX_DIM_CAP}, got {d}")
        if not self.bounded_on_atom(atom):
            raise NotBounded(f"body is unbounded on atom {atom}")
        if d == 1:
            u = U[:, 0]
            r = np.min(c[u != 0] / np.abs(u[u != 0]))
            verts = np.array([[-r], [r]])
        else:
            halfspaces = np.vstack(
                [np.hstack([U, -c[:, None]]), np.hstack([-U, -c[:, None]])]
            )
            hs = HalfspaceIntersection(halfspaces, np.zeros(d))
            verts = _unique_rows(hs.intersections)
        verts.setflags(write=False)
        self._vertex_cache[atom] = verts
        return verts

    def atom_support(self, atom: int, directions: np.ndarray) -> np.ndarray:
        """Support function ``max_{x in body} <u, x>`` for the rows ``u``."""
        dirs = np.atleast_2d(np.asarray(directions, dtype=float))
        if self.dim(atom) <= VERTEX_DIM_CAP:
            return (dirs @ self.vertices(atom).T).max(axis=1)
        return np.array([_lp_support(*self._data[atom], u) for u in dirs])

    def grid_support(self, atom: int) -> np.ndarray:
        """Support values along the body's own directions (its tight offsets)."""
        if self.tight:
            return self._data[atom][1]
        if atom not in self._support_cache:
            self._support_cache[atom] = self.atom_support(atom, self._data[atom][0])
        return self._support_cache[atom]

    def inradius(self, atom: int, kind: str = "l2") -> float:
        """Largest ``r`` with the ``kind``-ball of radius ``r`` inside the body."""
        U, c = self._data[atom]
        return float(np.min(c / lp_norm(_DUAL_KIND[kind], U)))

    def same_grid(self, other: SymmetricBody) -> bool:
        return self.on == other.on and all(
            np.array_equal(self.directions(a), other.directions(a)) for a in self.on
        )

    def restrict(self, b: Condition) -> SymmetricBody:
        return SymmetricBody(b, {a: self._data[a] for a in b}, tight=self.tight)

    def __repr__(self) -> str:
        dims = {a: self.dim(a) for a in self.on}
        return f"SymmetricBody(on={sorted(self.on.atoms)}, dims={dims})"

    def to_json(self) -> dict:
        return {
            "on": self.on.to_json(),
            "per_atom": {
                str(a): [{"u": u.tolist(), "c": float(ci)} for u, ci in zip(U, c)]
                for a, (U, c) in self._data.items()
            },
        }

    @classmethod
    def from_json(cls, algebra: Algebra, data: Mapping) -> SymmetricBody:
        on = algebra.condition(data["on"])
        per_atom = {}
        for k, rows in data["per_atom"].items():
            U = np.array([r["u"] for r in rows], dtype=float)
            c = np.array([r["c"] for r in rows], dtype=float)
            per_atom[int(k)] = (U, c)
        return cls(on, per_atom)


def _atom_scalar(r, atom: int) -> float:
    if isinstance(r, ConditionalValue):
        return float(r[atom])
    return float(r)


def _sign_rows(dim: int) -> np.ndarray:
    """Sign vectors with first entry +1 (one per symmetric pair)."""
    rows = [(1.0,) + s for s in itertools.product((1.0, -1.0), repeat=dim - 1)]
    return np.array(rows)


def _unique_rows(points: np.ndarray, decimals: int = 10) -> np.ndarray:
    keys = np.round(points, decimals)
    _, idx = np.unique(keys, axis=0, return_index=True)
    return np.array(points[np.sort(idx)])


def _lp_support(U: np.ndarray, c: np.ndarray, u: np.ndarray) -> float:
    A = np.vstack([U, -U])
    b = np.concatenate([c, c])
    res = linprog(-u, A_ub=A, b_ub=b, bounds=[(None, None)] * U.shape[1], method="highs")
    if res.status == 3:
        return math.inf
    return float(-res.fun)


def gauge(C: SymmetricBody, x: CondVector) -> CondReal:
    """Minkowski functional ``inf{r > 0 : x in rC}`` per atom."""
    if not x.on <= C.on:
        raise ConditionMismatch(f"vector on {x.on} outside the body's condition {C.on}")
    return CondReal(x.on, {a: float(C.atom_gauge(a, x[a])) for a in x.on})


def support_function(C: SymmetricBody, u: CondVector) -> CondReal:
    """``h_C(u) = max_{x in C} <u, x>`` per atom (``inf`` where unbounded)."""
    out = {}
    for a in u.on:
        if C.dim(a) != u.dim(a):
            raise DimensionMismatch(f"atom {a}: direction dimension {u.dim(a)}, body {C.dim(a)}")
        if C.bounded_on_atom(a):
            out[a] = float(C.atom_support(a, u[a])[0])
        else:
            out[a] = _lp_support(C.directions(a), C.offsets(a), u[a])
    return CondReal(u.on, out)


def minkowski_combine(alpha, A: SymmetricBody, beta, B: SymmetricBody) -> SymmetricBody:
    """Outer grid polytope of ``alpha*A + beta*B`` (``alpha, beta >= 0``).

    The offsets are ``alpha*h_A(u_j) + beta*h_B(u_j)`` on the common
    direction grid, which makes the result tight whenever both inputs are.
    """
    if not A.same_grid(B):
        raise GridMismatch("Minkowski combination needs a common direction grid")
    data = {}
    for a in A.on:
        al, be = _atom_scalar(alpha, a), _atom_scalar(beta, a)
        if al < 0 or be < 0:
            raise ValueError("combination coefficients must be nonnegative")
        data[a] = (A.directions(a), al * A.grid_support(a) + be * B.grid_support(a))
    return SymmetricBody(A.on, data, tight=True)


def body_inclusion(A: SymmetricBody, B, tol: float = 1e-9) -> dict:
    """Atoms where ``A`` is contained in the convex set ``B``.

    ``B`` is anything exposing ``atom_gauge(atom, points)``; since both are
    convex it suffices that every vertex of ``A`` has ``B``-gauge at most 1.
    """
    included = []
    for a in A.on & B.on:
        if not A.bounded_on_atom(a):
            continue
        if np.all(B.atom_gauge(a, A.vertices(a)) <= 1.0 + tol):
            included.append(a)
    return {"included_condition": A.algebra.condition(included)}


# --------------------------------------------------------------------------
# Norms


@dataclass(frozen=True)
class CondNorm:
    """One of the norms ``l1``, ``l2``, ``linf`` or the gauge of a body."""

    kind: str = "l2"
    body: SymmetricBody | None = None

    def __post_init__(self):
        if self.kind not in ANALYTIC_KINDS + ("gauge",):
            raise UnsupportedNormKind(f"unknown norm kind {self.kind!r}")
        if (self.kind == "gauge") != (self.body is not None):
            raise ValueError("a body is given exactly for the gauge norm")

    @property
    def analytic(self) -> bool:
        return self.kind in ANALYTIC_KINDS

    def atom_norm(self, atom: int, points) -> np.ndarray:
        if self.kind == "gauge":
            return self.body.atom_gauge(atom, points)
        return lp_norm(self.kind, points)

    def __call__(self, x: CondVector) -> CondReal:
        return CondReal(x.on, {a: float(self.atom_norm(a, x[a])) for a in x.on})

    def dual(self) -> CondNorm:
        if not self.analytic:
            raise UnsupportedNormKind("dual of a gauge norm has no analytic form")
        return CondNorm(_DUAL_KIND[self.kind])

    def atom_dual_norm(self, atom: int, f) -> np.ndarray:
        """Dual norm ``sup_{|x| <= 1} <f, x>`` of the rows of ``f``."""
        if self.kind == "gauge":
            return np.abs(np.atleast_2d(f) @ self.body.vertices(atom).T).max(axis=1).reshape(np.shape(f)[:-1])
        return lp_norm(_DUAL_KIND[self.kind], f)

    def unit_ball(self, on: Condition, dim, grids=None) -> SymmetricBody:
        if self.kind == "gauge":
            return self.body
        if self.kind == "linf":
            return SymmetricBody.box(on, dim, grids=grids)
        if self.kind == "l1":
            return SymmetricBody.cross_polytope(on, dim, grids=grids)
        return SymmetricBody.euclidean(on, dim, grids=grids)


# --------------------------------------------------------------------------
# Linear maps


class CondLinearMap:
    """Per-atom real matrices between conditionally finitely generated spaces."""

    def __init__(
        self,
        on: Condition,
        per_atom: Mapping[int, np.ndarray],
        domain: CondNorm | str | None = None,
        codomain: CondNorm | str | None = None,
    ):
        if set(per_atom) != set(on.atoms):
            raise InvalidAssignment(
                f"matrices given on atoms {sorted(per_atom)}, condition is {sorted(on.atoms)}"
            )
        self.on = on
        self._mats = {}
        for a in sorted(per_atom):
            M = _frozen_array(per_atom[a])
            if M.ndim == 1:
                M = _frozen_array(M[None, :])
            if M.ndim != 2:
                raise DimensionMismatch(f"atom {a}: expected a matrix, got shape {M.shape}")
            self._mats[a] = M
        self.domain = CondNorm(domain) if isinstance(domain, str) else domain or CondNorm("l2")
        self.codomain = CondNorm(codomain) if isinstance(codomain, str) else codomain or CondNorm("l2")

    @property
    def algebra(self) -> Algebra:
        return self.on.algebra

    def __getitem__(self, atom: int) -> np.ndarray:
        return self._mats[atom]

    def items(self):
        return self._mats.items()

    @property
    def is_functional(self) -> bool:
        return all(M.shape[0] == 1 for M in self._mats.values())

    def __call__(self, x: CondVector) -> CondVector:
        if x.on != self.on:
            raise ConditionMismatch(f"map on {self.on}, vector on {x.on}")
        out = {}
        for a in self.on:
            M = self._mats[a]
            if M.shape[1] != x.dim(a):
                raise DimensionMismatch(f"atom {a}: map expects {M.shape[1]}, vector has {x.dim(a)}")
            out[a] = M @ x[a]
        return CondVector(self.on, out)

    def evaluate(self, x: CondVector) -> CondReal:
        """Value ``x*(x)`` of a functional."""
        y = self(x)
        return CondReal(self.on, {a: float(y[a][0]) for a in self.on})

    def restrict(self, b: Condition) -> CondLinearMap:
        return CondLinearMap(b, {a: self._mats[a] for a in b}, self.domain, self.codomain)

    def __eq__(self, other) -> bool:
        if not isinstance(other, CondLinearMap):
            return NotImplemented
        return self.on == other.on and all(
            np.array_equal(self._mats[a], other._mats[a]) for a in self.on
        )

    def __repr__(self) -> str:
        shapes = {a: M.shape for a, M in self._mats.items()}
        return f"CondLinearMap({shapes}, {self.domain.kind}->{self.codomain.kind})"

    def to_json(self) -> dict:
        return {
            "on": self.on.to_json(),
            "per_atom": {str(a): M.tolist() for a, M in self._mats.items()},
            "domain": self.domain.kind,
            "codomain": self.codomain.kind,
        }

    @classmethod
    def from_json(cls, algebra: Algebra, data: Mapping) -> CondLinearMap:
        per_atom = {int(k): np.array(v, dtype=float) for k, v in data["per_atom"].items()}
        on = algebra.condition(data["on"]) if "on" in data else algebra.condition(per_atom)
        return cls(on, per_atom, CondNorm(data.get("domain", "l2")), CondNorm(data.get("codomain", "l2")))


def concatenate_maps(maps: Sequence[CondLinearMap], partition) -> CondLinearMap:
    if len(maps) != len(partition.blocks):
        raise InvalidAssignment(f"{len(maps)} maps for {len(partition.blocks)} blocks")
    out = {}
    for T, block in zip(maps, partition.blocks):
        for a in block:
            out[a] = T[a]
    return CondLinearMap(partition.owner, out, maps[0].domain, maps[0].codomain)


def spectral_norm(M: np.ndarray, rtol: float = 1e-9, max_iter: int = 10_000, seed: int = 0) -> float:
    """Largest singular value by power iteration on ``M^T M``.

    Starts from the all-ones vector and restarts from seeded random vectors
    when the iterate collapses; the Rayleigh quotient is a certified lower
    bound on ``sigma_max**2`` and the iteration stops once it moves by less
    than ``rtol`` relative.
    """
    M = np.asarray(M, dtype=float)
    G = M.T @ M
    n = G.shape[0]
    scale = np.abs(G).max()
    if scale == 0:
        return 0.0
    rng = np.random.default_rng(seed)
    starts = [np.ones(n)] + [rng.standard_normal(n) for _ in range(3)]
    best = 0.0
    for v in starts:
        v = v / np.linalg.norm(v)
        lam = float(v @ G @ v)
        stalled = False
        for _ in range(max_iter):
            w = G @ v
            nw = np.linalg.norm(w)
            if nw <= 1e-300 or nw < 1e-14 * scale:
                stalled = True
                break
            v = w / nw
            new = float(v @ G @ v)
            if abs(new - lam) <= rtol * 1e-3 * abs(new):
                lam = new
                break
            lam = new
        best = max(best, lam)
        if not stalled and best > 0:
            break
    return math.sqrt(max(best, 0.0))


def _atom_operator_norm(M: np.ndarray, dom: str, cod: str, rtol: float) -> float:
    if M.shape[0] == 1:
        return float(lp_norm(_DUAL_KIND[dom], M[0]))
    if dom == "l1":
        return float(lp_norm(cod, M.T).max())
    if dom == cod == "linf":
        return float(np.abs(M).sum(axis=1).max())
    if dom == cod == "l2":
        return spectral_norm(M, rtol)
    if dom == "linf" and cod in ("l1", "l2") and M.shape[1] <= 16:
        signs = np.array(list(itertools.product((1.0, -1.0), repeat=M.shape[1])))
        return float(lp_norm(cod, signs @ M.T).max())
    raise UnsupportedNormKind(f"no analytic operator norm for {dom} -> {cod}")


def operator_norm(T: CondLinearMap, rtol: float = 1e-9) -> CondReal:
    """``||T|| = sup{||T x|| : x in B_E}`` per atom."""
    dom, cod = T.domain.kind, T.codomain.kind
    if not (T.domain.analytic and T.codomain.analytic):
        raise UnsupportedNormKind("gauge norms: use sampled_operator_norm (a lower bound)")
    return CondReal(T.on, {a: _atom_operator_norm(M, dom, cod, rtol) for a, M in T.items()})


def sampled_operator_norm(T: CondLinearMap, samples: int = 256, seed: int = 0) -> CondReal:
    """Lower bound on ``||T||`` from the domain ball's vertices and random boundary points.

    Exact when the domain ball is a polytope of dimension at most 4, since
    a convex function attains its maximum over a polytope at a vertex.
    """
    rng = np.random.default_rng(seed)
    out = {}
    for a, M in T.items():
        d = M.shape[1]
        pts = [rng.standard_normal((samples, d))]
        if T.domain.kind == "gauge" and d <= VERTEX_DIM_CAP:
            pts.append(T.domain.body.vertices(a))
        elif T.domain.kind == "linf" and d <= 12:
            pts.append(np.array(list(itertools.product((1.0, -1.0), repeat=d))))
        elif T.domain.kind == "l1":
            pts.append(np.eye(d))
        P = np.vstack(pts)
        P = P / T.domain.atom_norm(a, P)[:, None]
        out[a] = float(T.codomain.atom_norm(a, P @ M.T).max())
    return CondReal(T.on, out)


# --------------------------------------------------------------------------
# Duality


def _atom_norming(kind: str, x: np.ndarray) -> np.ndarray:
    nrm = float(lp_norm(kind, x))
    f = np.zeros_like(x)
    if nrm == 0:
        return f
    if kind == "l2":
        return x / nrm
    if kind == "l1":
        return np.sign(x)
    if kind == "linf":
        i = int(np.argmax(np.abs(x)))  # first maximal coordinate
        f[i] = np.sign(x[i])
        return f
    raise UnsupportedNormKind(f"no analytic norming functional for {kind!r}")


def norming_functional(x: CondVector, norm: CondNorm | str = "l2") -> CondLinearMap:
    """``x*`` with ``||x*|| <= 1`` and ``x*(x) = ||x||`` on every atom."""
    norm = CondNorm(norm) if isinstance(norm, str) else norm
    if not norm.analytic:
        raise UnsupportedNormKind("norming functionals are analytic only for l1, l2, linf")
    return CondLinearMap(
        x.on,
        {a: _atom_norming(norm.kind, v)[None, :] for a, v in x.items()},
        domain=norm,
        codomain=CondNorm("l2"),
    )


def functional_norm(f: CondLinearMap) -> CondReal:
    """Dual norm of a functional with respect to its domain norm."""
    return CondReal(f.on, {a: float(f.domain.atom_dual_norm(a, M[0])) for a, M in f.items()})


def _dual_sphere_samples(kind: str, d: int, n: int, rng) -> np.ndarray:
    pts = rng.standard_normal((n, d))
    return pts / lp_norm(_DUAL_KIND[kind], pts)[:, None]


def embedding_check(x: CondVector, norm: CondNorm | str = "l2", dual_samples: int = 64, seed: int = 0) -> dict:
    """Norm of ``j(x)`` in the bidual versus ``||x||``.

    The sup of ``|x*(x)|`` runs over the norming functional of ``x`` and
    ``dual_samples`` random points of the dual unit sphere.
    """
    norm = CondNorm(norm) if isinstance(norm, str) else norm
    rng = np.random.default_rng(seed)
    xs = norming_functional(x, norm)
    sup, gap = {}, {}
    for a, v in x.items():
        F = np.vstack([xs[a], _dual_sphere_samples(norm.kind, v.size, dual_samples, rng)])
        sup[a] = float(np.abs(F @ v).max())
        gap[a] = abs(sup[a] - float(norm.atom_norm(a, v)))
    return {"sup_over_dual_ball": CondReal(x.on, sup), "isometry_gap": CondReal(x.on, gap)}


def _dual_ball_extreme_points(kind: str, d: int, resolution: float) -> np.ndarray:
    """Points whose convex hull is (or approximates) the unit ball of the dual of ``kind``."""
    dual = _DUAL_KIND[kind]
    if dual == "linf":
        return np.array(list(itertools.product((1.0, -1.0), repeat=d)))
    if dual == "l1":
        return np.vstack([np.eye(d), -np.eye(d)])
    return sphere_net(d, resolution)


def double_dual_norm(xi: CondVector, norm: CondNorm | str = "l2", resolution: float = 0.01) -> CondReal:
    """Bidual norm of ``j(xi)``: ``sup |x*(xi)|`` over the dual unit ball.

    Uses the dual ball's vertices when it is a polytope, and a sphere net
    together with the norming functional in the Euclidean case.
    """
    norm = CondNorm(norm) if isinstance(norm, str) else norm
    out = {}
    for a, v in xi.items():
        F = _dual_ball_extreme_points(norm.kind, v.size, resolution)
        if norm.kind == "l2":
            F = np.vstack([F, _atom_norming("l2", v)])
        out[a] = float(np.abs(F @ v).max())
    return CondReal(xi.on, out)


def goldstine_check(kind: str, dim: int, resolution: float = 0.05, algebra: Algebra | None = None) -> dict:
    """Every bidual unit vector on a sphere net is ``j`` of a primal unit vector.

    In finite dimension the bidual is the space itself; a bidual element
    ``phi`` is represented by the vector ``xi`` with ``phi(x*) = x*(xi)``.
    Returns the largest gap ``| ||j(xi)||_** - ||xi|| |`` over the net.
    """
    if dim > 3:
        raise UnsupportedDimension("Goldstine grid check limited to dimension 3")
    alg = algebra or Algebra(1)
    pts = sphere_net(dim, resolution)
    pts = pts / lp_norm(kind, pts)[:, None]
    gap = 0.0
    for p in pts:
        xi = CondVector.constant(alg.one, p)
        gap = max(gap, float(abs(double_dual_norm(xi, kind, resolution) - 1.0).max()))
    return {"max_gap": gap, "samples": len(pts)}


# --------------------------------------------------------------------------
# Nets and half-norming sets


@functools.lru_cache(maxsize=64)
def _sphere_net(dim: int, radius: float) -> np.ndarray:
    if dim == 1:
        P = np.array([[1.0], [-1.0]])
    else:
        h = 2.0 * radius / math.sqrt(dim - 1)
        steps = max(1, math.ceil(2.0 / h))
        axis = np.linspace(-1.0, 1.0, steps + 1)
        face = np.array(list(itertools.product(axis, repeat=dim - 1)))
        P = _unique_rows(np.vstack([np.insert(face, i, s, axis=1) for i in range(dim) for s in (1.0, -1.0)]))
        P = P / np.linalg.norm(P, axis=1, keepdims=True)
    P.setflags(write=False)
    return P


def sphere_net(dim: int, radius: float) -> np.ndarray:
    """Points of the Euclidean unit sphere forming a ``radius``-net of it.

    Grid points on the faces of the cube ``[-1, 1]**dim`` at spacing ``h``
    are projected radially.  Radial projection from outside the unit ball
    is the metric projection onto it, hence 1-Lipschitz, so every unit
    vector is within ``h*sqrt(dim-1)/2 <= radius`` of a net point.
    """
    return _sphere_net(int(dim), float(radius))


def half_norming_set(F: Sequence[CondVector], norm: CondNorm | str = "l2", net_radius: float = 0.25) -> dict:
    """Unit functionals ``z*_n`` with ``||y||/2 <= max_n |<y, z*_n>|`` on ``span F``.

    Per atom the unit sphere of the span is covered by a 1/4-net; the
    norming functional of each net point ``z_n`` then satisfies
    ``z_n(z*_n) = 1 >= 3/4`` and any unit ``y`` within 1/4 of ``z_n`` has
    ``<y, z*_n> >= 1/2``.  Atoms with fewer net points repeat ``z*_1`` up
    to the common length; ``count`` is the conditional size of the family.
    """
    norm = CondNorm(norm) if isinstance(norm, str) else norm
    if norm.kind != "l2":
        raise UnsupportedNormKind("half-norming nets are built for the Euclidean norm")
    if not F:
        raise ValueError("empty spanning family")
    on = F[0].on
    per_atom, counts = {}, {}
    for a in on:
        A = np.column_stack([f[a] for f in F])
        Uq, s, _ = np.linalg.svd(A, full_matrices=False)
        rank = int(np.sum(s > 1e-12 * max(1.0, s.max(initial=0.0))))
        if rank > VERTEX_DIM_CAP:
            raise UnsupportedDimension(f"subspace of dimension {rank} on atom {a}")
        if rank == 0:
            funcs = np.zeros((1, A.shape[0]))
        else:
            Q = Uq[:, :rank]
            funcs = sphere_net(rank, net_radius) @ Q.T
        per_atom[a] = funcs
        counts[a] = len(funcs)
    top = max(counts.values())
    functionals = []
    for n in range(top):
        rows = {a: per_atom[a][n if n < counts[a] else 0][None, :] for a in on}
        functionals.append(CondLinearMap(on, rows, domain=norm))
    return {"functionals": functionals, "count": CondNat(on, counts)}


def half_norming_value(functionals: Sequence[CondLinearMap], y: CondVector) -> CondReal:
    """``max_n |<y, z*_n>|``."""
    out = {a: 0.0 for a in y.on}
    for f in functionals:
        v = f.evaluate(y)
        for a in y.on:
            out[a] = max(out[a], abs(v[a]))
    return CondReal(y.on, out)


# --------------------------------------------------------------------------
# Equivalence constants of a basis


def _min_norm_on_simplex_l2(M: np.ndarray) -> float:
    """Exact ``min ||M w||_2`` over the probability simplex, by active faces."""
    n = M.shape[1]
    best = math.inf
    for size in range(1, n + 1):
        for S in itertools.combinations(range(n), size):
            MS = M[:, S]
            G = MS.T @ MS
            try:
                y = np.linalg.solve(G, np.ones(size))
            except np.linalg.LinAlgError:
                continue
            if np.all(y > 0):
                w = y / y.sum()
                best = min(best, float(np.linalg.norm(MS @ w)))
    return best


def _min_norm_on_simplex_lp(M: np.ndarray, norm: CondNorm, atom: int) -> float:
    """``min ||M w||`` over the simplex for a polyhedral norm, as a linear program."""
    d, n = M.shape
    if norm.kind == "gauge":
        U, c = norm.body.directions(atom), norm.body.offsets(atom)
        rows = (U / c[:, None]) @ M
    elif norm.kind == "linf":
        rows = M
    else:
        rows = None
    if rows is not None:
        # variables (w, t): minimise t with |rows w| <= t
        k = rows.shape[0]
        A = np.vstack([np.hstack([rows, -np.ones((k, 1))]), np.hstack([-rows, -np.ones((k, 1))])])
        b = np.zeros(2 * k)
        cost = np.r_[np.zeros(n), 1.0]
        A_eq = np.r_[np.ones(n), 0.0][None, :]
        bounds = [(0, None)] * n + [(None, None)]
    else:
        # l1: variables (w, t_1..t_d): minimise sum t with |M w| <= t
        A = np.vstack([np.hstack([M, -np.eye(d)]), np.hstack([-M, -np.eye(d)])])
        b = np.zeros(2 * d)
        cost = np.r_[np.zeros(n), np.ones(d)]
        A_eq = np.r_[np.ones(n), np.zeros(d)][None, :]
        bounds = [(0, None)] * n + [(None, None)] * d
    res = linprog(cost, A_ub=A, b_ub=b, A_eq=A_eq, b_eq=[1.0], bounds=bounds, method="highs")
    return float(res.fun)


def equivalence_constants(basis: Sequence[CondVector], norm: CondNorm | str = "l2", rank_tol: float = 1e-10) -> dict:
    """Constants with ``r_low |z|_1 <= ||sum z_k b_k|| <= r_high |z|_1``.

    ``r_high`` is the largest ``||b_k||`` (a convex function peaks at the
    vertices ``+-e_k`` of the l1 sphere).  ``r_low`` is the minimum over
    the l1 sphere, computed facet by facet: each facet is a simplex and the
    minimum of a norm over it is a convex program, solved exactly.
    """
    norm = CondNorm(norm) if isinstance(norm, str) else norm
    on = basis[0].on
    low, high = {}, {}
    for a in on:
        M = np.column_stack([b[a] for b in basis])
        n = M.shape[1]
        s = np.linalg.svd(M, compute_uv=False)
        if np.sum(s > rank_tol * max(1.0, s.max())) < n:
            raise NotInjective(f"basis is linearly dependent on atom {a}")
        high[a] = float(norm.atom_norm(a, M.T).max())
        best = math.inf
        # sign patterns with first sign fixed: the sphere is symmetric
        for signs in itertools.product((1.0, -1.0), repeat=n - 1):
            Ms = M * np.r_[1.0, signs]
            if norm.kind == "l2":
                val = _min_norm_on_simplex_l2(Ms)
            else:
                val = _min_norm_on_simplex_lp(Ms, norm, a)
            best = min(best, val)
        low[a] = best
    return {"r_low": CondReal(on, low), "r_high": CondReal(on, high)}


# --------------------------------------------------------------------------
# Banach disk comparisons


def banach_disk_constants(C: SymmetricBody, norm: CondNorm | str = "l2") -> dict:
    """Constants comparing ``||.||`` with the gauge of a bounded body ``C``.

    ``r_high = max_{x in C} ||x||`` (attained at a vertex) gives
    ``||x|| <= r_high * ||x||_C``; ``r_in``, the largest radius of a norm
    ball inside ``C``, gives ``r_in * ||x||_C <= ||x||``.
    """
    norm = CondNorm(norm) if isinstance(norm, str) else norm
    high, inner = {}, {}
    for a in C.on:
        high[a] = float(norm.atom_norm(a, C.vertices(a)).max())
        inner[a] = C.inradius(a, norm.kind)
    return {"r_high": CondReal(C.on, high), "r_in": CondReal(C.on, inner)}


# --------------------------------------------------------------------------
# l2 direct sum


def direct_sum_l2(
    x: Sequence[CondVector] | Callable[[int], CondVector],
    functionals: Sequence[CondVector] | Callable[[int], CondVector],
    norms: Sequence[CondNorm | str] | CondNorm | str = "l2",
    truncation: int | None = None,
    tail_bound: float | None = None,
) -> dict:
    """Norm, pairing and dual-norm gap in the l2 direct sum of finitely many components.

    ``functionals[k]`` represents ``x*_k`` by its coefficient vector on
    component ``k``.  ``||T_{x*}||`` is evaluated at the unit element built
    from the components' norming vectors, which attains ``||x*||_2``; the
    Cauchy-Schwarz bound shows nothing larger is possible.  Streams
    (callables) are accepted only with a truncation and a certified tail.
    """
    if callable(x) or callable(functionals):
        if truncation is None or tail_bound is None:
            raise UncertifiedTail("infinitely supported elements need a truncation and a tail bound")
        xs = [x(k) for k in range(1, truncation + 1)] if callable(x) else list(x)
        fs = [functionals(k) for k in range(1, truncation + 1)] if callable(functionals) else list(functionals)
    else:
        xs, fs = list(x), list(functionals)
    if len(xs) != len(fs):
        raise DimensionMismatch(f"{len(xs)} components against {len(fs)} functional components")
    if isinstance(norms, (str, CondNorm)):
        norms = [norms] * len(xs)
    norms = [CondNorm(n) if isinstance(n, str) else n for n in norms]
    on = xs[0].on
    norm2, pairing, dual2, attained = {}, {}, {}, {}
    for a in on:
        sq, pair, dsq = 0.0, 0.0, 0.0
        parts = []
        for xk, fk, nk in zip(xs, fs, norms):
            v, f = xk[a], fk[a]
            if v.shape != f.shape:
                raise DimensionMismatch(f"atom {a}: component and functional dimensions differ")
            sq += float(nk.atom_norm(a, v)) ** 2
            pair += float(f @ v)
            fn = float(nk.atom_dual_norm(a, f))
            dsq += fn**2
            parts.append((f, fn, nk))
        norm2[a] = math.sqrt(sq)
        pairing[a] = pair
        dual2[a] = math.sqrt(dsq)
        if dsq == 0:
            attained[a] = 0.0
            continue
        # unit element y_k = (||x*_k|| / ||x*||_2) u_k with x*_k(u_k) = ||x*_k||, ||u_k|| = 1
        val, ysq = 0.0, 0.0
        for f, fn, nk in parts:
            u = _norming_vector(nk.kind, f, a, nk)
            yk = (fn / dual2[a]) * u
            val += float(f @ yk)
            ysq += float(nk.atom_norm(a, yk)) ** 2
        attained[a] = val / math.sqrt(ysq) if ysq > 0 else 0.0
    T_norm = CondReal(on, attained)
    dual_norm = CondReal(on, dual2)
    return {
        "norm2": CondReal(on, norm2),
        "pairing": CondReal(on, pairing),
        "dual_norm2": dual_norm,
        "functional_norm": T_norm,
        "pairing_norm_gap": abs(T_norm - dual_norm),
    }


def _norming_vector(kind: str, f: np.ndarray, atom: int, norm: CondNorm) -> np.ndarray:
    """Unit vector ``u`` with ``f(u) = ||f||_*``."""
    if not np.any(f):
        return np.zeros_like(f)
    if kind == "l2":
        return f / np.linalg.norm(f)
    if kind == "l1":
        i = int(np.argmax(np.abs(f)))
        u = np.zeros_like(f)
        u[i] = np.sign(f[i])
        return u
    if kind == "linf":
        return np.sign(f)
    V = norm.body.vertices(atom)
    return V[int(np.argmax(V @ f))]


# --------------------------------------------------------------------------
# Renorming


def renorm_bodies(K: SymmetricBody, B_E: SymmetricBody, count: int) -> list[SymmetricBody]:
    """``[B_1, ..., B_count]`` with ``B_n = 2**n K + 2**-n B_E``."""
    return [minkowski_combine(2.0**n, K, 2.0**-n, B_E) for n in range(1, count + 1)]


class RenormBody:
    """The set ``C = {x : sum_n ||x||_n**2 <= 1}`` with ``||.||_n`` the gauge of ``B_n``.

    Its gauge is ``||x||_C = (sum_n ||x||_n**2)**(1/2)``, evaluated up to
    ``truncation`` terms; the neglected tail is at most
    ``||x||_K**2 * 4**-truncation / 3`` because ``2**n K`` lies in ``B_n``.
    """

    def __init__(self, K: SymmetricBody, B_E: SymmetricBody, truncation: int = 40):
        if K.on != B_E.on:
            raise ConditionMismatch("K and B_E live on different conditions")
        unbounded = K.on - K.bounded_condition()
        if not unbounded.is_zero:
            raise NotBounded(f"K is unbounded on {unbounded}")
        self.K = K
        self.B_E = B_E
        self.on = K.on
        self.truncation = truncation
        self.bodies = renorm_bodies(K, B_E, truncation)

    @property
    def algebra(self) -> Algebra:
        return self.on.algebra

    def atom_sum_squares(self, atom: int, points) -> np.ndarray:
        pts = np.asarray(points, dtype=float)
        total = np.zeros(pts.shape[:-1])
        for B in self.bodies:
            total = total + B.atom_gauge(atom, pts) ** 2
        return total

    def atom_tail(self, atom: int, points) -> np.ndarray:
        gk = self.K.atom_gauge(atom, points)
        return gk**2 * 4.0 ** (-self.truncation) / 3.0

    def atom_gauge(self, atom: int, points) -> np.ndarray:
        return np.sqrt(self.atom_sum_squares(atom, points))

    def gauge(self, x: CondVector) -> CondReal:
        return CondReal(x.on, {a: float(self.atom_gauge(a, x[a])) for a in x.on})

    def bounded_condition(self) -> Condition:
        """``C`` lies in ``B_1``, so it is bounded wherever ``B_1`` is."""
        return self.bodies[0].bounded_condition() if self.bodies else self.algebra.zero


def renorm_sequence(
    K: SymmetricBody,
    B_E: SymmetricBody,
    x: CondVector,
    truncation: int = 40,
    tol: float = 1e-9,
) -> dict:
    """Gauges ``||x||_n`` of the bodies ``B_n`` and the renormed value ``||x||_C``.

    ``sum_bound_ok`` is the condition where ``sum_n ||x||_n**2 <= 1/3 + tol``,
    the bound every ``x`` in ``K`` satisfies since ``||x||_n <= 2**-n``.
    """
    C = RenormBody(K, B_E, truncation)
    lam = {a: float(B_E.atom_gauge(a, K.vertices(a)).max()) for a in K.on}
    gauges = [gauge(B, x) for B in C.bodies]
    sums = CondReal(x.on, {a: float(C.atom_sum_squares(a, x[a])) for a in x.on})
    tail = CondReal(x.on, {a: float(C.atom_tail(a, x[a])) for a in x.on})
    ok = x.algebra.condition(a for a in x.on if sums[a] <= 1.0 / 3.0 + tol)
    return {
        "gauges": gauges,
        "sum_squares": sums,
        "tail_bound": tail,
        "norm_C": sums.sqrt(),
        "sum_bound_ok": ok,
        "lambda": CondReal(K.on, lam),
        "C": C,
    }
