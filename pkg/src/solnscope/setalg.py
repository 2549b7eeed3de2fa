"""A small, closed algebra of convex subsets of ℝⁿ.

Variants: Empty, Point, Polyhedron (H-rep, optionally with strict rows so
relative interiors and open rays stay exact), ConeGen, Product of 1-D
intervals (endpoints may be symbolic), Translate, and a fixed catalog of
analytic atoms.  Only the queries the diagnostics need are implemented;
anything outside that fragment raises a typed error.
"""
from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from . import lp
from . import scalars as S
from .ratlin import RationalMatrix, Subspace, kernel_basis, rref, vec, zeros
from .scalars import NEG_INF, POS_INF, is_inf


class SetAlgebraError(Exception):
    pass


class EmptySet(SetAlgebraError):
    pass


class UnsupportedIntersection(SetAlgebraError):
    pass


class UnsupportedProjection(SetAlgebraError):
    pass


class UnsupportedComparison(SetAlgebraError):
    pass


# --------------------------------------------------------------------------
# intervals


@dataclass(frozen=True)
class Interval:
    lo: object
    hi: object
    lo_open: bool = False
    hi_open: bool = False

    def __post_init__(self):
        if is_inf(self.lo):
            object.__setattr__(self, "lo_open", True)
        else:
            object.__setattr__(self, "lo", S.norm(self.lo))
        if is_inf(self.hi):
            object.__setattr__(self, "hi_open", True)
        else:
            object.__setattr__(self, "hi", S.norm(self.hi))

    @staticmethod
    def point(x) -> "Interval":
        return Interval(x, x)

    @staticmethod
    def real() -> "Interval":
        return Interval(NEG_INF, POS_INF)

    def is_empty(self) -> bool:
        c = S.cmp(self.lo, self.hi)
        return c > 0 or (c == 0 and (self.lo_open or self.hi_open))

    def is_point(self) -> bool:
        return not is_inf(self.lo) and not self.lo_open and not self.hi_open and S.eq(self.lo, self.hi)

    def is_real(self) -> bool:
        return is_inf(self.lo) and is_inf(self.hi)

    def is_bounded(self) -> bool:
        return not is_inf(self.lo) and not is_inf(self.hi)

    def is_closed(self) -> bool:
        return (is_inf(self.lo) or not self.lo_open) and (is_inf(self.hi) or not self.hi_open)

    def is_rational(self) -> bool:
        return all(is_inf(x) or isinstance(x, Fraction) for x in (self.lo, self.hi))

    def contains(self, x) -> bool:
        c_lo = S.cmp(self.lo, x)
        c_hi = S.cmp(x, self.hi)
        ok_lo = c_lo < 0 or (c_lo == 0 and not self.lo_open)
        ok_hi = c_hi < 0 or (c_hi == 0 and not self.hi_open)
        return ok_lo and ok_hi

    def contains_interval(self, other: "Interval") -> bool:
        if other.is_empty():
            return True
        c = S.cmp(self.lo, other.lo)
        lo_ok = c < 0 or (c == 0 and (not self.lo_open or other.lo_open))
        c = S.cmp(other.hi, self.hi)
        hi_ok = c < 0 or (c == 0 and (not self.hi_open or other.hi_open))
        return lo_ok and hi_ok

    def intersect(self, other: "Interval") -> "Interval":
        c = S.cmp(self.lo, other.lo)
        if c > 0:
            lo, lo_open = self.lo, self.lo_open
        elif c < 0:
            lo, lo_open = other.lo, other.lo_open
        else:
            lo, lo_open = self.lo, self.lo_open or other.lo_open
        c = S.cmp(self.hi, other.hi)
        if c < 0:
            hi, hi_open = self.hi, self.hi_open
        elif c > 0:
            hi, hi_open = other.hi, other.hi_open
        else:
            hi, hi_open = self.hi, self.hi_open or other.hi_open
        return Interval(lo, hi, lo_open, hi_open)

    def shift(self, c) -> "Interval":
        lo = self.lo if is_inf(self.lo) else S.add(self.lo, c)
        hi = self.hi if is_inf(self.hi) else S.add(self.hi, c)
        return Interval(lo, hi, self.lo_open, self.hi_open)

    def scale(self, k) -> "Interval":
        s = S.sign(k)
        if s == 0:
            return Interval.point(Fraction(0))

        def m(x):
            return x if is_inf(x) else S.mul(k, x)

        if s > 0:
            return Interval(m(self.lo), m(self.hi), self.lo_open, self.hi_open)
        lo = -self.hi if is_inf(self.hi) else S.mul(k, self.hi)
        hi = -self.lo if is_inf(self.lo) else S.mul(k, self.lo)
        return Interval(lo, hi, self.hi_open, self.lo_open)

    def __add__(self, other: "Interval") -> "Interval":
        lo = NEG_INF if is_inf(self.lo) or is_inf(other.lo) else S.add(self.lo, other.lo)
        hi = POS_INF if is_inf(self.hi) or is_inf(other.hi) else S.add(self.hi, other.hi)
        return Interval(lo, hi, self.lo_open or other.lo_open, self.hi_open or other.hi_open)

    def recession(self) -> "Interval":
        lo = NEG_INF if is_inf(self.lo) else Fraction(0)
        hi = POS_INF if is_inf(self.hi) else Fraction(0)
        return Interval(lo, hi)

    def closure(self) -> "Interval":
        return Interval(self.lo, self.hi)

    def interior(self) -> "Interval":
        if self.is_point():
            return self
        return Interval(self.lo, self.hi, True, True)

    def render(self) -> str:
        if self.is_empty():
            return "empty"
        if self.is_point():
            return "{" + S.render(self.lo) + "}"
        if self.is_real():
            return "R"
        left = "(" if self.lo_open else "["
        right = ")" if self.hi_open else "]"
        return f"{left}{S.render(self.lo)},{S.render(self.hi)}{right}"


def interval_hull_union(parts: Sequence[Interval]) -> list[Interval]:
    """Sort and merge a union of intervals into disjoint pieces."""
    parts = [p for p in parts if not p.is_empty()]
    if not parts:
        return []

    def key(iv):
        return (S.to_float(iv.lo), iv.lo_open)

    parts.sort(key=key)
    merged = [parts[0]]
    for p in parts[1:]:
        last = merged[-1]
        c = S.cmp(p.lo, last.hi)
        touching = c < 0 or (c == 0 and not (p.lo_open and last.hi_open))
        if touching:
            c2 = S.cmp(p.hi, last.hi)
            if c2 > 0:
                hi, hi_open = p.hi, p.hi_open
            elif c2 < 0:
                hi, hi_open = last.hi, last.hi_open
            else:
                hi, hi_open = last.hi, last.hi_open and p.hi_open
            # lo end: the earlier-starting piece wins; equal starts take the closed flag
            lo, lo_open = last.lo, last.lo_open
            if S.cmp(p.lo, last.lo) == 0:
                lo_open = last.lo_open and p.lo_open
            merged[-1] = Interval(lo, hi, lo_open, hi_open)
        else:
            merged.append(p)
    return merged


# --------------------------------------------------------------------------
# set variants


class ConvexSet:
    n: int

    def render(self) -> str:
        return render(self)

    def __str__(self) -> str:
        return render(self)


@dataclass(frozen=True)
class Empty(ConvexSet):
    n: int


@dataclass(frozen=True)
class Point(ConvexSet):
    coords: tuple

    def __post_init__(self):
        object.__setattr__(self, "coords", tuple(S.norm(c) for c in self.coords))

    @property
    def n(self) -> int:
        return len(self.coords)


@dataclass(frozen=True)
class Polyhedron(ConvexSet):
    """{x : a·x ≤ b (or < b when strict) for each row, c·x = d for each equality}."""

    n: int
    ineqs: tuple = ()  # ((a, b, strict), ...)
    eqs: tuple = ()  # ((c, d), ...)

    @staticmethod
    def build(n: int, ineqs=(), eqs=(), strict=()) -> "Polyhedron":
        rows = [(vec(a), Fraction(b), False) for a, b in ineqs]
        rows += [(vec(a), Fraction(b), True) for a, b in strict]
        return Polyhedron(n, tuple(rows), tuple((vec(a), Fraction(b)) for a, b in eqs))

    @staticmethod
    def whole(n: int) -> "Polyhedron":
        return Polyhedron(n)

    def feasible_point(self):
        closed = [r for r in self.ineqs if not r[2]]
        strict = [r for r in self.ineqs if r[2]]
        return lp.feasible_point(
            self.n,
            [r[0] for r in closed], [r[1] for r in closed],
            [e[0] for e in self.eqs], [e[1] for e in self.eqs],
            [r[0] for r in strict], [r[1] for r in strict],
        )

    def with_rows(self, ineqs=(), eqs=()) -> "Polyhedron":
        return Polyhedron(self.n, self.ineqs + tuple(ineqs), self.eqs + tuple(eqs))

    def closure(self) -> "Polyhedron":
        return Polyhedron(self.n, tuple((a, b, False) for a, b, _ in self.ineqs), self.eqs)

    def lp(self, c, maximize=True) -> lp.LPResult:
        """Optimize over the closure."""
        return lp.linprog(
            c, [r[0] for r in self.ineqs], [r[1] for r in self.ineqs],
            [e[0] for e in self.eqs], [e[1] for e in self.eqs], maximize=maximize,
        )


@dataclass(frozen=True)
class ConeGen(ConvexSet):
    n: int
    rays: tuple = ()
    lineality: tuple = ()


@dataclass(frozen=True)
class Product(ConvexSet):
    factors: tuple  # tuple of Interval

    @property
    def n(self) -> int:
        return len(self.factors)


@dataclass(frozen=True)
class Translate(ConvexSet):
    inner: ConvexSet
    offset: tuple

    def __post_init__(self):
        object.__setattr__(self, "offset", tuple(S.norm(c) for c in self.offset))
        if len(self.offset) != self.inner.n:
            raise ValueError("translate offset has the wrong dimension")

    @property
    def n(self) -> int:
        return self.inner.n


@dataclass(frozen=True)
class ExpHypograph(ConvexSet):
    """{x : x_p ≥ e^{x_q}}, other coordinates free."""

    n: int
    p: int
    q: int


@dataclass(frozen=True)
class HyperbolaSet(ConvexSet):
    """{x : x_p·x_q ≥ 1, x_p ≥ 0, x_q ≥ 0}, other coordinates free."""

    n: int
    p: int
    q: int


@dataclass(frozen=True)
class HingeExpRange(ConvexSet):
    """{(0,0)} ∪ [−1,0)×(0,∞): the range of ∂max{e^{x_q} − x_p, 0} (scaled by w)."""

    n: int
    p: int
    q: int
    weight: Fraction = Fraction(1)


@dataclass(frozen=True)
class Segment(ConvexSet):
    """conv{start, end}; endpoints may be symbolic."""

    start: tuple
    end: tuple

    def __post_init__(self):
        object.__setattr__(self, "start", tuple(S.norm(c) for c in self.start))
        object.__setattr__(self, "end", tuple(S.norm(c) for c in self.end))

    @property
    def n(self) -> int:
        return len(self.start)


ANALYTIC = (ExpHypograph, HyperbolaSet, HingeExpRange)


@dataclass(frozen=True)
class AffineFlat:
    anchor: tuple
    directions: Subspace

    def __post_init__(self):
        object.__setattr__(self, "anchor", tuple(S.norm(c) for c in self.anchor))
        if len(self.anchor) != self.directions.ambient_dim:
            raise ValueError("anchor and directions live in different spaces")

    @property
    def n(self) -> int:
        return len(self.anchor)

    @staticmethod
    def subspace(W: Subspace) -> "AffineFlat":
        return AffineFlat(zeros(W.ambient_dim), W)


def box(lower: Sequence, upper: Sequence) -> Product:
    return Product(tuple(Interval(lo, hi) for lo, hi in zip(lower, upper)))


def origin(n: int) -> Point:
    return Point(zeros(n))


def whole_space(n: int) -> Product:
    return Product(tuple(Interval.real() for _ in range(n)))


# --------------------------------------------------------------------------
# conversions


def _axis_subspace(W: Subspace) -> list[int] | None:
    """Coordinates spanned by W if it is a coordinate subspace."""
    coords = []
    for v in W.basis:
        nz = [i for i, a in enumerate(v) if a != 0]
        if len(nz) != 1:
            return None
        coords.append(nz[0])
    return sorted(coords)


def as_polyhedron(X: ConvexSet) -> Polyhedron | None:
    """Exact H-representation when every number involved is rational."""
    if isinstance(X, Polyhedron):
        return X
    if isinstance(X, Empty):
        return Polyhedron(X.n, ((zeros(X.n), Fraction(-1), False),))
    if isinstance(X, Point):
        if not S.is_rational_vec(X.coords):
            return None
        eqs = []
        for i, c in enumerate(X.coords):
            a = [Fraction(0)] * X.n
            a[i] = Fraction(1)
            eqs.append((tuple(a), c))
        return Polyhedron(X.n, (), tuple(eqs))
    if isinstance(X, Product):
        rows, eqs = [], []
        for i, f in enumerate(X.factors):
            if not f.is_rational():
                return None
            e = [Fraction(0)] * X.n
            e[i] = Fraction(1)
            if f.is_point():
                eqs.append((tuple(e), f.lo))
                continue
            if not is_inf(f.lo):
                rows.append((tuple(-a for a in e), -f.lo, f.lo_open))
            if not is_inf(f.hi):
                rows.append((tuple(e), f.hi, f.hi_open))
        return Polyhedron(X.n, tuple(rows), tuple(eqs))
    if isinstance(X, Translate):
        if not S.is_rational_vec(X.offset):
            return None
        inner = as_polyhedron(X.inner)
        if inner is None:
            return None
        o = X.offset
        rows = tuple((a, b + sum(x * y for x, y in zip(a, o)), s) for a, b, s in inner.ineqs)
        eqs = tuple((a, b + sum(x * y for x, y in zip(a, o))) for a, b in inner.eqs)
        return Polyhedron(X.n, rows, eqs)
    if isinstance(X, Segment):
        if not (S.is_rational_vec(X.start) and S.is_rational_vec(X.end)):
            return None
        n = X.n
        eqs = []
        for i in range(n):
            a = [Fraction(0)] * (n + 1)
            a[i] = Fraction(1)
            a[n] = -(X.end[i] - X.start[i])
            eqs.append((tuple(a), X.start[i]))
        e = [Fraction(0)] * (n + 1)
        e[n] = Fraction(1)
        ineqs = [(tuple(e), Fraction(1), False), (tuple(-v for v in e), Fraction(0), False)]
        rows, eq_rows = lp.fourier_motzkin(n + 1, ineqs, eqs, [n])
        return Polyhedron(n, tuple(rows), tuple(eq_rows))
    if isinstance(X, ConeGen):
        n, k, l = X.n, len(X.rays), len(X.lineality)
        nv = n + k + l
        eqs = []
        for i in range(n):
            a = [Fraction(0)] * nv
            a[i] = Fraction(1)
            for j, r in enumerate(X.rays):
                a[n + j] = -Fraction(r[i])
            for j, r in enumerate(X.lineality):
                a[n + k + j] = -Fraction(r[i])
            eqs.append((tuple(a), Fraction(0)))
        ineqs = []
        for j in range(k):
            a = [Fraction(0)] * nv
            a[n + j] = Fraction(-1)
            ineqs.append((tuple(a), Fraction(0), False))
        rows, eq_rows = lp.fourier_motzkin(nv, ineqs, eqs, list(range(n, nv)))
        return Polyhedron(n, tuple(rows), tuple(eq_rows))
    return None


def as_product(X: ConvexSet) -> Product | None:
    if isinstance(X, Product):
        return X
    if isinstance(X, Point):
        return Product(tuple(Interval.point(c) for c in X.coords))
    if isinstance(X, Translate):
        inner = as_product(X.inner)
        if inner is None:
            return None
        return Product(tuple(f.shift(o) for f, o in zip(inner.factors, X.offset)))
    if isinstance(X, (Polyhedron, ConeGen)):
        P = as_polyhedron(X)
        if is_empty(P):
            return None
        axis = all(sum(1 for v in a if v != 0) <= 1 for a, _, _ in P.ineqs) and all(
            sum(1 for v in a if v != 0) <= 1 for a, _ in P.eqs
        )
        if axis:
            factors = [Interval.real() for _ in range(P.n)]
            for a, b, s in P.ineqs:
                nz = [i for i, v in enumerate(a) if v != 0]
                if not nz:
                    continue
                i = nz[0]
                bound = b / a[i]
                if a[i] > 0:
                    factors[i] = factors[i].intersect(Interval(NEG_INF, bound, True, s))
                else:
                    factors[i] = factors[i].intersect(Interval(bound, POS_INF, s, True))
            for a, b in P.eqs:
                nz = [i for i, v in enumerate(a) if v != 0]
                if nz:
                    i = nz[0]
                    factors[i] = factors[i].intersect(Interval.point(b / a[i]))
            return Product(tuple(factors))
        # general polyhedron: compare with its bounding box
        factors = [image_1d(P, _unit(P.n, i)) for i in range(P.n)]
        cand = Product(tuple(factors))
        if contains(P, cand):
            return cand
        return None
    return None


def _unit(n: int, i: int) -> tuple:
    e = [Fraction(0)] * n
    e[i] = Fraction(1)
    return tuple(e)


# --------------------------------------------------------------------------
# basic queries


def is_empty(X: ConvexSet) -> bool:
    if isinstance(X, Empty):
        return True
    if isinstance(X, (Point, ConeGen, Segment) + ANALYTIC):
        return False
    if isinstance(X, Product):
        return any(f.is_empty() for f in X.factors)
    if isinstance(X, Translate):
        return is_empty(X.inner)
    if isinstance(X, Polyhedron):
        return X.feasible_point() is None
    raise TypeError(type(X))


def contains_point(X: ConvexSet, x: Sequence) -> bool:
    x = tuple(S.norm(c) for c in x)
    if len(x) != X.n:
        raise ValueError("dimension mismatch")
    if isinstance(X, Empty):
        return False
    if isinstance(X, Point):
        return all(S.eq(a, b) for a, b in zip(X.coords, x))
    if isinstance(X, Product):
        return all(f.contains(c) for f, c in zip(X.factors, x))
    if isinstance(X, Translate):
        return contains_point(X.inner, S.vsub(x, X.offset))
    if isinstance(X, Polyhedron):
        for a, b, s in X.ineqs:
            c = S.cmp(S.vdot(a, x), b)
            if c > 0 or (c == 0 and s):
                return False
        return all(S.eq(S.vdot(a, x), d) for a, d in X.eqs)
    if isinstance(X, ConeGen):
        P = as_polyhedron(X)
        return contains_point(P, x)
    if isinstance(X, Segment):
        d = S.vsub(X.end, X.start)
        off = S.vsub(x, X.start)
        k = next((i for i, c in enumerate(d) if S.sign(c) != 0), None)
        if k is None:
            return all(S.sign(c) == 0 for c in off)
        t = S.div(off[k], d[k])
        if S.sign(t) < 0 or S.cmp(t, Fraction(1)) > 0:
            return False
        return all(S.sign(S.sub(o, S.mul(t, c))) == 0 for o, c in zip(off, d))
    if isinstance(X, ExpHypograph):
        return S.le(S.exp(x[X.q]), x[X.p])
    if isinstance(X, HyperbolaSet):
        p, q = x[X.p], x[X.q]
        return S.sign(p) >= 0 and S.sign(q) >= 0 and S.le(Fraction(1), S.mul(p, q))
    if isinstance(X, HingeExpRange):
        p, q = S.div(x[X.p], X.weight), S.div(x[X.q], X.weight)
        others = all(S.sign(c) == 0 for i, c in enumerate(x) if i not in (X.p, X.q))
        if not others:
            return False
        if S.sign(p) == 0 and S.sign(q) == 0:
            return True
        return S.le(Fraction(-1), p) and S.sign(p) < 0 and S.sign(q) > 0
    raise TypeError(type(X))


def translate(X: ConvexSet, offset: Sequence) -> ConvexSet:
    offset = tuple(S.norm(c) for c in offset)
    if all(S.sign(c) == 0 for c in offset):
        return X
    if isinstance(X, Empty):
        return X
    if isinstance(X, Point):
        return Point(S.vadd(X.coords, offset))
    if isinstance(X, Product):
        return Product(tuple(f.shift(o) for f, o in zip(X.factors, offset)))
    if isinstance(X, Translate):
        return translate(X.inner, S.vadd(X.offset, offset))
    if isinstance(X, Segment):
        return Segment(S.vadd(X.start, offset), S.vadd(X.end, offset))
    if isinstance(X, Polyhedron) and S.is_rational_vec(offset):
        return as_polyhedron(Translate(X, offset))
    return Translate(X, offset)


def _linear_image_of_point(a, x):
    return S.vdot(a, x)


def image_1d(X: ConvexSet, a: Sequence) -> Interval | None:
    """The set {a·x : x ∈ X} as an interval (None when X is empty)."""
    a = tuple(S.norm(c) for c in a)
    if isinstance(X, Empty) or is_empty(X):
        return None
    if isinstance(X, Point):
        return Interval.point(S.vdot(a, X.coords))
    if isinstance(X, Product):
        total = Interval.point(Fraction(0))
        for ai, f in zip(a, X.factors):
            if S.sign(ai) != 0:
                total = total + f.scale(ai)
        return total
    if isinstance(X, Translate):
        inner = image_1d(X.inner, a)
        return inner.shift(S.vdot(a, X.offset))
    if isinstance(X, Segment):
        lo, hi = S.vdot(a, X.start), S.vdot(a, X.end)
        return Interval(lo, hi) if S.le(lo, hi) else Interval(hi, lo)
    if isinstance(X, (Polyhedron, ConeGen)):
        P = as_polyhedron(X)
        if not S.is_rational_vec(a):
            raise UnsupportedProjection("symbolic functional on a polyhedron")
        ends = []
        for maximize in (False, True):
            res = P.lp(a, maximize=maximize)
            if res.status == "unbounded":
                ends.append((POS_INF if maximize else NEG_INF, True))
                continue
            val = res.value
            attained = not is_empty(P.with_rows(eqs=((a, val),)))
            ends.append((val, not attained))
        return Interval(ends[0][0], ends[1][0], ends[0][1], ends[1][1])
    if isinstance(X, ExpHypograph):
        if any(S.sign(c) != 0 for i, c in enumerate(a) if i not in (X.p, X.q)):
            return Interval.real()
        return _exp_hypograph_range(a[X.p], a[X.q])
    if isinstance(X, HyperbolaSet):
        if any(S.sign(c) != 0 for i, c in enumerate(a) if i not in (X.p, X.q)):
            return Interval.real()
        return _hyperbola_range(a[X.p], a[X.q])
    if isinstance(X, HingeExpRange):
        if any(S.sign(c) != 0 for i, c in enumerate(a) if i not in (X.p, X.q)):
            raise UnsupportedProjection("functional leaves the atom's plane")
        w = X.weight
        part = Interval(-w, Fraction(0), False, True).scale(a[X.p]) + Interval(
            Fraction(0), POS_INF, True, True
        ).scale(a[X.q])
        if S.sign(a[X.p]) == 0 and S.sign(a[X.q]) == 0:
            return Interval.point(Fraction(0))
        merged = interval_hull_union([part, Interval.point(Fraction(0))])
        assert len(merged) == 1
        return merged[0]
    raise TypeError(type(X))


def _exp_hypograph_range(ap, aq) -> Interval:
    sp_, sq = S.sign(ap), S.sign(aq)
    if sp_ == 0 and sq == 0:
        return Interval.point(Fraction(0))
    if sp_ == 0:
        return Interval.real()
    if sq == 0:
        return Interval(Fraction(0), POS_INF, True) if sp_ > 0 else Interval(NEG_INF, Fraction(0), True, True)
    if sp_ * sq > 0:
        return Interval.real()
    if sp_ > 0:
        # min of ap·e^q + aq·q at e^q = −aq/ap
        val = S.add(S.neg(aq), S.mul(aq, S.log(S.div(S.neg(aq), ap))))
        return Interval(val, POS_INF)
    flipped = _exp_hypograph_range(S.neg(ap), S.neg(aq))
    return flipped.scale(Fraction(-1))


def _hyperbola_range(ap, aq) -> Interval:
    sp_, sq = S.sign(ap), S.sign(aq)
    if sp_ == 0 and sq == 0:
        return Interval.point(Fraction(0))
    if sp_ < 0 or sq < 0:
        if sp_ <= 0 and sq <= 0:
            return _hyperbola_range(S.neg(ap), S.neg(aq)).scale(Fraction(-1))
        return Interval.real()
    if sp_ == 0 or sq == 0:
        return Interval(Fraction(0), POS_INF, True)
    return Interval(S.mul(2, S.sqrt(S.mul(ap, aq))), POS_INF)


# --------------------------------------------------------------------------
# recession cones


def recession_cone(X: ConvexSet) -> ConvexSet:
    """(X)_∞ of the closure of X; raises EmptySet for the empty set."""
    if is_empty(X):
        raise EmptySet("recession cone of the empty set is undefined")
    if isinstance(X, (Point, Segment)):
        return origin(X.n)
    if isinstance(X, Product):
        return Product(tuple(f.recession() for f in X.factors))
    if isinstance(X, Translate):
        return recession_cone(X.inner)
    if isinstance(X, ConeGen):
        return X
    if isinstance(X, Polyhedron):
        rows = tuple((a, Fraction(0), False) for a, _, _ in X.ineqs)
        eqs = tuple((a, Fraction(0)) for a, _ in X.eqs)
        return Polyhedron(X.n, rows, eqs)
    if isinstance(X, ExpHypograph):
        f = [Interval.real() for _ in range(X.n)]
        f[X.p] = Interval(Fraction(0), POS_INF)
        f[X.q] = Interval(NEG_INF, Fraction(0))
        return Product(tuple(f))
    if isinstance(X, HyperbolaSet):
        f = [Interval.real() for _ in range(X.n)]
        f[X.p] = Interval(Fraction(0), POS_INF)
        f[X.q] = Interval(Fraction(0), POS_INF)
        return Product(tuple(f))
    if isinstance(X, HingeExpRange):
        f = [Interval.point(Fraction(0)) for _ in range(X.n)]
        f[X.q] = Interval(Fraction(0), POS_INF)
        return Product(tuple(f))
    raise TypeError(type(X))


def is_cone_origin(K: ConvexSet) -> bool:
    """True when the (nonempty) cone K is {0}."""
    if isinstance(K, Point):
        return all(S.sign(c) == 0 for c in K.coords)
    if isinstance(K, Product):
        return all(f.is_point() for f in K.factors)
    P = as_polyhedron(K)
    if P is None:
        raise UnsupportedComparison(f"cannot test {type(K).__name__} against the origin")
    Pb = _boxed(P.closure(), 1)
    for i in range(P.n):
        e = _unit(P.n, i)
        for maximize in (False, True):
            res = Pb.lp(e, maximize=maximize)
            if res.ok and res.value != 0:
                return False
    return True


def _boxed(P: Polyhedron, radius) -> Polyhedron:
    rows = []
    for i in range(P.n):
        e = _unit(P.n, i)
        rows.append((e, Fraction(radius), False))
        rows.append((tuple(-a for a in e), Fraction(radius), False))
    return P.with_rows(ineqs=rows)


def is_bounded(X: ConvexSet) -> bool:
    if is_empty(X):
        return True
    return is_cone_origin(recession_cone(X))


def is_singleton(X: ConvexSet):
    """The unique point of X, or None."""
    if is_empty(X):
        return None
    if isinstance(X, Point):
        return X.coords
    if isinstance(X, Translate):
        inner = is_singleton(X.inner)
        return None if inner is None else S.vadd(inner, X.offset)
    if isinstance(X, Product):
        if all(f.is_point() for f in X.factors):
            return tuple(f.lo for f in X.factors)
        return None
    if isinstance(X, ANALYTIC):
        return None
    if isinstance(X, Segment):
        same = all(S.eq(a, b) for a, b in zip(X.start, X.end))
        return X.start if same else None
    P = as_polyhedron(X)
    pt = []
    for i in range(P.n):
        iv = image_1d(P, _unit(P.n, i))
        if not iv.is_point():
            return None
        pt.append(iv.lo)
    return tuple(pt)


# --------------------------------------------------------------------------
# intersections and projections


def intersect_flat(X: ConvexSet, F: AffineFlat) -> ConvexSet:
    if X.n != F.n:
        raise ValueError("ambient dimensions differ")
    if isinstance(X, Empty):
        return X
    if isinstance(X, Translate):
        shifted = AffineFlat(S.vsub(F.anchor, X.offset), F.directions)
        return translate(intersect_flat(X.inner, shifted), X.offset)
    if isinstance(X, Point):
        diff = S.vsub(X.coords, F.anchor)
        if S.is_rational_vec(diff):
            return X if F.directions.contains(diff) else Empty(X.n)
        free = _axis_subspace(F.directions)
        if free is None:
            raise UnsupportedIntersection("symbolic point against a skew flat")
        ok = all(S.sign(d) == 0 for i, d in enumerate(diff) if i not in free)
        return X if ok else Empty(X.n)
    if S.is_rational_vec(F.anchor):
        P = as_polyhedron(X)
        if P is not None:
            N = F.directions.constraint_rows()
            eqs = tuple((row, S.vdot(row, F.anchor)) for row in N)
            out = P.with_rows(eqs=eqs)
            return Empty(X.n) if is_empty(out) else out
    if isinstance(X, HingeExpRange):
        return _hinge_range_meet_flat(X, F)
    free = _axis_subspace(F.directions)
    if isinstance(X, Product):
        if free is None:
            raise UnsupportedIntersection("symbolic product against a skew flat")
        out = []
        for i, f in enumerate(X.factors):
            if i in free:
                out.append(f)
            elif f.contains(F.anchor[i]):
                out.append(Interval.point(F.anchor[i]))
            else:
                return Empty(X.n)
        return Product(tuple(out))
    if isinstance(X, (ExpHypograph, HyperbolaSet)):
        return _atom_meet_flat(X, F, free)
    raise UnsupportedIntersection(f"{type(X).__name__} meets {F.directions.dim}-dimensional flat")


def _hinge_range_meet_flat(X: HingeExpRange, F: AffineFlat) -> ConvexSet:
    """Split the range into its origin and its half-open strip, meet each with F."""
    n, p, q = X.n, X.p, X.q
    if not S.is_rational_vec(F.anchor):
        raise UnsupportedIntersection("hinge range against a symbolic flat")
    rows = [(_unit(n, p), Fraction(0), True), (tuple(-a for a in _unit(n, p)), X.weight, False),
            (tuple(-a for a in _unit(n, q)), Fraction(0), True)]
    eqs = [(_unit(n, i), Fraction(0)) for i in range(n) if i not in (p, q)]
    eqs += [(row, S.vdot(row, F.anchor)) for row in F.directions.constraint_rows()]
    strip = Polyhedron(n, tuple(rows), tuple(eqs))
    has_origin = F.directions.contains(S.vsub(zeros(n), F.anchor))
    if is_empty(strip):
        return origin(n) if has_origin else Empty(n)
    if not has_origin:
        return strip
    if F.directions.dim >= 2 and all(F.directions.contains(_unit(n, i)) for i in (p, q)):
        return X
    if F.directions.dim == 1:
        # a line through 0 meets the strip in a ray segment whose closure reaches 0
        return strip.closure()
    raise UnsupportedIntersection("hinge range meets a skew flat of dimension >= 2")


def _atom_meet_flat(X, F: AffineFlat, free) -> ConvexSet:
    n, p, q = X.n, X.p, X.q
    a = F.anchor
    if free is None:
        if F.directions.dim != 1:
            raise UnsupportedIntersection("analytic atom meets a skew flat of dimension >= 2")
        w = F.directions.basis[0]
        others = [i for i in range(n) if i not in (p, q)]
        if any(w[i] != 0 for i in others) or (w[p] != 0 and w[q] != 0):
            raise UnsupportedIntersection("no closed-form root for this direction")
        free = [p] if w[p] != 0 else [q]
        # the flat reduces to an axis-parallel line through the anchor
    factors = []
    for i in range(n):
        if i in free:
            factors.append(Interval.real())
        else:
            factors.append(Interval.point(a[i]))
    pf, qf = p in free, q in free
    if pf and qf:
        raise UnsupportedIntersection("analytic atom meets a flat of dimension >= 2 in its plane")
    if not pf and not qf:
        return Product(tuple(factors)) if contains_point(X, _with_free_zero(a, free)) else Empty(n)
    if isinstance(X, ExpHypograph):
        if pf:  # x_p ≥ e^{a_q}
            factors[p] = Interval(S.exp(a[q]), POS_INF)
        else:  # a_p ≥ e^{x_q}
            if S.sign(a[p]) <= 0:
                return Empty(n)
            factors[q] = Interval(NEG_INF, S.log(a[p]))
    else:
        fixed = a[q] if pf else a[p]
        if S.sign(fixed) <= 0:
            return Empty(n)
        factors[p if pf else q] = Interval(S.div(Fraction(1), fixed), POS_INF)
    return Product(tuple(factors))


def _with_free_zero(a, free):
    return tuple(Fraction(0) if i in free else c for i, c in enumerate(a))


def intersect(X: ConvexSet, Y: ConvexSet) -> ConvexSet:
    """Intersection of two sets in the polyhedral or product fragment."""
    if is_empty(X) or is_empty(Y):
        return Empty(X.n)
    PX, PY = as_polyhedron(X), as_polyhedron(Y)
    if PX is not None and PY is not None:
        out = PX.with_rows(PY.ineqs, PY.eqs)
        return Empty(X.n) if is_empty(out) else out
    QX, QY = as_product(X), as_product(Y)
    if QX is not None and QY is not None:
        out = Product(tuple(f.intersect(g) for f, g in zip(QX.factors, QY.factors)))
        return Empty(X.n) if is_empty(out) else out
    raise UnsupportedIntersection(f"{type(X).__name__} with {type(Y).__name__}")


def project_subspace(X: ConvexSet, W: Subspace) -> ConvexSet:
    """Orthogonal image P_W(X)."""
    n = X.n
    if is_empty(X):
        return Empty(n)
    if W.dim == n:
        return X
    if W.dim == 0:
        return origin(n)
    if isinstance(X, Point):
        if S.is_rational_vec(X.coords):
            return Point(W.project(X.coords))
        axes = _axis_subspace(W)
        if axes is None:
            raise UnsupportedProjection("symbolic point onto a skew subspace")
        return Point(tuple(c if i in axes else Fraction(0) for i, c in enumerate(X.coords)))
    if isinstance(X, Translate):
        inner = project_subspace(X.inner, W)
        if S.is_rational_vec(X.offset):
            return translate(inner, W.project(X.offset))
        axes = _axis_subspace(W)
        if axes is None:
            raise UnsupportedProjection("symbolic offset onto a skew subspace")
        return translate(inner, tuple(c if i in axes else Fraction(0) for i, c in enumerate(X.offset)))
    P = as_polyhedron(X)
    if P is not None:
        return _project_polyhedron(P, W)
    axes = _axis_subspace(W)
    if isinstance(X, Product):
        if axes is None:
            raise UnsupportedProjection("symbolic product onto a skew subspace")
        return Product(
            tuple(f if i in axes else Interval.point(Fraction(0)) for i, f in enumerate(X.factors))
        )
    if isinstance(X, ANALYTIC):
        if axes is None:
            raise UnsupportedProjection(f"{type(X).__name__} along non-catalog directions")
        factors = []
        for i in range(n):
            if i not in axes:
                factors.append(Interval.point(Fraction(0)))
            elif i in (X.p, X.q):
                if X.p in axes and X.q in axes:
                    raise UnsupportedProjection("projection keeps the whole atom plane")
                factors.append(image_1d(X, _unit(n, i)))
            else:
                factors.append(Interval.real())
        return Product(tuple(factors))
    raise UnsupportedProjection(type(X).__name__)


def _project_polyhedron(P: Polyhedron, W: Subspace) -> Polyhedron:
    n, k = P.n, W.dim
    B = RationalMatrix.from_rows(W.basis, n)  # rows = basis vectors
    G = B @ B.T()
    from .ratlin import inverse

    M = inverse(G) @ B  # coordinates y = M x of P_W x, with P_W x = Bᵀ y
    nv = n + k  # variables (x, y)
    ineqs = [(tuple(a) + (Fraction(0),) * k, b, s) for a, b, s in P.ineqs]
    eqs = [(tuple(a) + (Fraction(0),) * k, b) for a, b in P.eqs]
    for i in range(k):
        row = tuple(-v for v in M.row(i)) + tuple(Fraction(int(j == i)) for j in range(k))
        eqs.append((row, Fraction(0)))
    y_ineqs, y_eqs = lp.fourier_motzkin(nv, ineqs, eqs, list(range(n)))
    # back to z ∈ ℝⁿ: z ∈ W and y = M z
    z_ineqs = [(M.rmatvec(a), b, s) for a, b, s in y_ineqs]
    z_eqs = [(M.rmatvec(a), b) for a, b in y_eqs]
    z_eqs += [(row, Fraction(0)) for row in W.constraint_rows()]
    return Polyhedron(n, tuple(z_ineqs), tuple(z_eqs))


def normal_cone_box(lower: Sequence, upper: Sequence, u: Sequence) -> ConvexSet:
    factors = []
    for lo, hi, ui in zip(lower, upper, u):
        at_lo, at_hi = S.eq(ui, lo), S.eq(ui, hi)
        if S.lt(ui, lo) or S.lt(hi, ui):
            return Empty(len(u))
        if at_lo and at_hi:
            factors.append(Interval.real())
        elif at_hi:
            factors.append(Interval(Fraction(0), POS_INF))
        elif at_lo:
            factors.append(Interval(NEG_INF, Fraction(0)))
        else:
            factors.append(Interval.point(Fraction(0)))
    return Product(tuple(factors))


# --------------------------------------------------------------------------
# containment and equality


def contains(X: ConvexSet, Y: ConvexSet) -> bool:
    """Y ⊆ X."""
    if X.n != Y.n:
        raise ValueError("ambient dimensions differ")
    if is_empty(Y):
        return True
    if is_empty(X):
        return False
    if isinstance(Y, Point):
        return contains_point(X, Y.coords)
    PX, PY = as_polyhedron(X), as_polyhedron(Y)
    if PX is not None and PY is not None:
        return _poly_contains(PX, PY)
    QX, QY = as_product(X), as_product(Y)
    if QX is not None and QY is not None:
        return all(f.contains_interval(g) for f, g in zip(QX.factors, QY.factors))
    if PX is not None:
        # polyhedral outer set: compare support values of Y row by row
        for a, b, s in PX.ineqs:
            iv = image_1d(Y, a)
            c = S.cmp(iv.hi, b)
            if c > 0 or (c == 0 and s and not iv.hi_open):
                return False
        for a, d in PX.eqs:
            iv = image_1d(Y, a)
            if not iv.is_point() or not S.eq(iv.lo, d):
                return False
        return True
    return _analytic_contains(X, Y)


def _poly_contains(PX: Polyhedron, PY: Polyhedron) -> bool:
    for a, b, s in PX.ineqs:
        neg = tuple(-v for v in a)
        # Y ∩ {a·x > b} (or ≥ b when the row is strict) must be empty
        row = (neg, -b, not s)
        if not is_empty(PY.with_rows(ineqs=(row,))):
            return False
    for a, d in PX.eqs:
        for row in ((a, d, True), (tuple(-v for v in a), -d, True)):
            # a·x < d  or a·x > d
            r = (tuple(-v for v in row[0]), -row[1], True)
            if not is_empty(PY.with_rows(ineqs=(r,))):
                return False
    return True


def _analytic_key(X):
    """Split X into (atom, offset) when X is a translated analytic atom."""
    if isinstance(X, ANALYTIC):
        return X, zeros(X.n)
    if isinstance(X, Translate) and isinstance(X.inner, ANALYTIC):
        return X.inner, X.offset
    return None, None


def _analytic_contains(X, Y) -> bool:
    ax, ox = _analytic_key(X)
    ay, oy = _analytic_key(Y)
    if ax is not None and ay is not None and ax == ay:
        d = S.vsub(oy, ox)
        if any(S.sign(c) != 0 for i, c in enumerate(d) if i not in (ax.p, ax.q)):
            return False
        if isinstance(ax, ExpHypograph):
            return S.sign(d[ax.p]) >= 0 and S.sign(d[ax.q]) <= 0
        if isinstance(ax, HyperbolaSet):
            return S.sign(d[ax.p]) >= 0 and S.sign(d[ax.q]) >= 0
        return all(S.sign(c) == 0 for c in d)
    if ax is not None and ay is None:
        # a product or polyhedron inside an atom: test the corners of a product
        Q = as_product(Y)
        if Q is not None and all(f.is_bounded() and f.is_closed() for f in Q.factors):
            corners = itertools.product(*[(f.lo, f.hi) for f in Q.factors])
            return all(contains_point(X, c) for c in corners)
        if Q is not None:
            return _product_in_atom(X, Q)
    raise UnsupportedComparison(f"{type(Y).__name__} inside {type(X).__name__}")


def _product_in_atom(X, Q: Product) -> bool:
    atom, off = _analytic_key(X)
    fp, fq = Q.factors[atom.p].shift(S.neg(off[atom.p])), Q.factors[atom.q].shift(S.neg(off[atom.q]))
    if isinstance(atom, ExpHypograph):
        # need p ≥ e^q on the whole rectangle: worst corner is (inf p, sup q)
        if is_inf(fp.lo) or is_inf(fq.hi):
            return False
        c = S.cmp(S.exp(fq.hi), fp.lo)
        return c < 0 or (c == 0 and not fp.lo_open and not fq.hi_open) or (c == 0 and (fp.lo_open or fq.hi_open))
    raise UnsupportedComparison("product inside this atom")


def equal(X: ConvexSet, Y: ConvexSet) -> bool:
    return contains(X, Y) and contains(Y, X)


# --------------------------------------------------------------------------
# relative interior, Cartesian products


def implicit_equalities(P: Polyhedron) -> Polyhedron:
    """Same set, with every implicit equality of the closure moved to eqs."""
    if is_empty(P):
        return P
    rows, eqs = [], list(P.eqs)
    for a, b, s in P.ineqs:
        res = P.lp(a, maximize=False)
        if res.ok and res.value == b and not s:
            eqs.append((a, b))
        else:
            rows.append((a, b, s))
    return Polyhedron(P.n, tuple(rows), tuple(eqs))


def relative_interior(X: ConvexSet) -> ConvexSet:
    if isinstance(X, (Empty, Point)):
        return X
    if isinstance(X, Product):
        return Product(tuple(f.interior() for f in X.factors))
    if isinstance(X, Translate):
        return translate(relative_interior(X.inner), X.offset)
    P = as_polyhedron(X)
    if P is None:
        raise UnsupportedComparison(f"relative interior of {type(X).__name__}")
    P = implicit_equalities(P.closure())
    return Polyhedron(P.n, tuple((a, b, True) for a, b, _ in P.ineqs), P.eqs)


def cartesian(n: int, parts: Sequence[tuple[Sequence[int], ConvexSet]]) -> ConvexSet:
    """Assemble per-block sets (block coordinates, set over those coordinates) into ℝⁿ."""
    for _, X in parts:
        if is_empty(X):
            return Empty(n)
    prods = [as_product(X) if not isinstance(X, ANALYTIC) else None for _, X in parts]
    if all(p is not None for p in prods):
        factors = [Interval.real() for _ in range(n)]
        for (coords, _), p in zip(parts, prods):
            for c, f in zip(coords, p.factors):
                factors[c] = f
        return Product(tuple(factors))
    polys = [as_polyhedron(X) for _, X in parts]
    if all(p is not None for p in polys):
        rows, eqs = [], []
        for (coords, _), P in zip(parts, polys):
            for a, b, s in P.ineqs:
                rows.append((_lift(a, coords, n), b, s))
            for a, b in P.eqs:
                eqs.append((_lift(a, coords, n), b))
        return Polyhedron(n, tuple(rows), tuple(eqs))
    atoms = [(c, X) for c, X in parts if isinstance(X, ANALYTIC)]
    rest = [(c, X) for c, X in parts if not isinstance(X, ANALYTIC)]
    def _pad_ok(atom, p):
        if p is None:
            return False
        if isinstance(atom, HingeExpRange):
            return all(f.is_point() and S.sign(f.lo) == 0 for f in p.factors)
        return all(f.is_real() for f in p.factors)

    if len(atoms) == 1 and all(_pad_ok(atoms[0][1], as_product(X)) for _, X in rest):
        coords, atom = atoms[0]
        return type(atom)(n, coords[atom.p], coords[atom.q], *_atom_extra(atom))
    raise UnsupportedIntersection("cannot assemble this Cartesian product")


def _atom_extra(atom):
    return (atom.weight,) if isinstance(atom, HingeExpRange) else ()


def _lift(a, coords, n):
    out = [Fraction(0)] * n
    for c, v in zip(coords, a):
        out[c] = v
    return tuple(out)


# --------------------------------------------------------------------------
# sampling (used by property tests and membership soundness checks)


def _rational_near(x: float, den: int = 64) -> Fraction:
    return Fraction(round(x * den), den)


def sample_points(X: ConvexSet, k: int, rng: random.Random, radius: int = 4) -> list[tuple]:
    """Up to k exact points of X (empty list for the empty set)."""
    if is_empty(X):
        return []
    if isinstance(X, Point):
        return [X.coords] * k
    if isinstance(X, Translate):
        return [S.vadd(p, X.offset) for p in sample_points(X.inner, k, rng, radius)]
    if isinstance(X, Product):
        out = []
        for _ in range(k):
            out.append(tuple(_sample_interval(f, rng, radius) for f in X.factors))
        return out
    if isinstance(X, ExpHypograph):
        out = []
        for _ in range(k):
            x = [Fraction(rng.randint(-radius * 4, radius * 4), 4) for _ in range(X.n)]
            qv = Fraction(rng.randint(-8, 4), 4)
            x[X.q] = qv
            upper = Fraction(math.ceil(math.exp(float(qv)) * 1000) + 1, 1000)
            x[X.p] = upper + Fraction(rng.randint(0, 8), 4)
            out.append(tuple(x))
        return out
    P = as_polyhedron(X)
    if P is None:
        raise UnsupportedProjection(f"cannot sample {type(X).__name__}")
    Pb = _boxed(P.closure(), radius)
    verts = []
    for _ in range(max(3, P.n + 1)):
        c = [Fraction(rng.randint(-5, 5)) for _ in range(P.n)]
        res = Pb.lp(c)
        if res.ok:
            verts.append(res.x)
    inner = P.feasible_point()
    if inner is None:
        return []
    verts.append(inner)
    out = []
    for _ in range(k):
        w = [Fraction(rng.randint(1, 6)) for _ in verts]
        tot = sum(w)
        pt = tuple(sum(wi * v[i] for wi, v in zip(w, verts)) / tot for i in range(P.n))
        if not contains_point(P, pt):
            # strict rows: pull towards the relatively interior point
            pt = tuple((a + b) / 2 for a, b in zip(pt, inner))
            while not contains_point(P, pt):
                pt = tuple((a + b) / 2 for a, b in zip(pt, inner))
        out.append(pt)
    return out


def _sample_interval(f: Interval, rng: random.Random, radius: int):
    if f.is_point():
        return f.lo
    lo = f.lo if not is_inf(f.lo) else None
    hi = f.hi if not is_inf(f.hi) else None
    if lo is not None and not isinstance(lo, Fraction):
        lo = _rational_near(S.to_float(lo), 10**6) + Fraction(1, 10**5)
    if hi is not None and not isinstance(hi, Fraction):
        hi = _rational_near(S.to_float(hi), 10**6) - Fraction(1, 10**5)
    if lo is None and hi is None:
        return Fraction(rng.randint(-radius * 4, radius * 4), 4)
    if lo is None:
        return hi - Fraction(rng.randint(0 if not f.hi_open else 1, radius * 4), 4)
    if hi is None:
        return lo + Fraction(rng.randint(0 if not f.lo_open else 1, radius * 4), 4)
    t = Fraction(rng.randint(1, 15), 16)
    if not f.lo_open and rng.random() < 0.1:
        return lo
    return lo + t * (hi - lo)


# --------------------------------------------------------------------------
# canonical rendering


def _render_row(a, names) -> tuple[str, str]:
    """Split a·x into (positive side, negative side) text."""
    a = _integral(a)
    pos, negs = [], []
    for coef, name in zip(a, names):
        if coef == 0:
            continue
        mag = abs(coef)
        term = name if mag == 1 else f"{S.render(mag)}*{name}"
        (pos if coef > 0 else negs).append(term)
    return " + ".join(pos), " + ".join(negs)


def _integral(a):
    dens = [Fraction(v).denominator for v in a]
    l = 1
    for d in dens:
        l = l * d // math.gcd(l, d)
    ints = [int(Fraction(v) * l) for v in a]
    g = 0
    for v in ints:
        g = math.gcd(g, abs(v))
    g = g or 1
    return [Fraction(v, g) for v in ints]


def _row_scale(a):
    dens = [Fraction(v).denominator for v in a]
    l = 1
    for d in dens:
        l = l * d // math.gcd(l, d)
    g = 0
    for v in a:
        g = math.gcd(g, abs(int(Fraction(v) * l)))
    return Fraction(l, g or 1)


def _render_poly(P: Polyhedron) -> str:
    names = [f"x{i + 1}" for i in range(P.n)]
    P = implicit_equalities(P)
    rows = lp.remove_redundant(list(P.ineqs), P.eqs) if P.ineqs else []
    # affine flat?
    if not rows:
        E = [a for a, _ in P.eqs]
        d = [b for _, b in P.eqs]
        from .ratlin import solve

        if E:
            M = RationalMatrix.from_rows(E, P.n)
            anchor = solve(M, d)
            W = kernel_basis(M)
        else:
            anchor, W = zeros(P.n), Subspace.full(P.n)
        from .ratlin import rowspace_basis

        anchor = rowspace_basis(RationalMatrix.from_rows(E, P.n)).project(anchor) if E else anchor
        span = "span{" + ",".join(S.render_vec(_integral(v)) for v in W.basis) + "}"
        if all(c == 0 for c in anchor):
            return span
        return S.render_vec(anchor) + " + " + span
    parts = []
    R, _ = rref([a for a, _ in P.eqs] and [list(a) + [b] for a, b in P.eqs], P.n + 1) if P.eqs else ([], [])
    for row in R:
        a, b = row[:-1], row[-1]
        k = _row_scale(a)
        lhs, rhs = _render_row(a, names)
        bb = b * k
        parts.append(_fmt_rel(lhs, rhs, "=", bb))
    for a, b, s in sorted(rows, key=lambda r: ([-Fraction(v) for v in _integral(r[0])], r[1])):
        k = _row_scale(a)
        lhs, rhs = _render_row(a, names)
        parts.append(_fmt_rel(lhs, rhs, "<" if s else "<=", b * k))
    return "{x : " + ", ".join(parts) + "}"


def _fmt_rel(lhs, rhs, op, b):
    if not lhs:
        lhs = "0"
    right = rhs
    if b != 0:
        right = (rhs + (" + " if b > 0 else " - ") if rhs else ("" if b > 0 else "-")) + S.render(abs(b))
    if not right:
        right = "0"
    return f"{lhs} {op} {right}"


def render(X: ConvexSet) -> str:
    if isinstance(X, Empty) or is_empty(X):
        return "empty"
    if isinstance(X, Point):
        return "{" + S.render_vec(X.coords) + "}"
    if isinstance(X, Product):
        if all(f.is_point() for f in X.factors):
            return "{" + S.render_vec(tuple(f.lo for f in X.factors)) + "}"
        if len(X.factors) > 1 and all(f.is_real() for f in X.factors):
            return f"R^{len(X.factors)}"
        return " x ".join(f.render() for f in X.factors)
    if isinstance(X, Translate):
        Q = as_product(X)
        if Q is not None:
            return render(Q)
        P = as_polyhedron(X)
        if P is not None:
            return render(P)
        return render(X.inner) + " + " + S.render_vec(X.offset)
    if isinstance(X, Segment):
        if S.is_rational_vec(X.start) and S.is_rational_vec(X.end):
            Q = as_product(X)
            if Q is not None:
                return render(Q)
        return "conv{" + S.render_vec(X.start) + "," + S.render_vec(X.end) + "}"
    if isinstance(X, ExpHypograph):
        return "{x : " + f"x{X.p + 1} >= exp(x{X.q + 1})" + "}"
    if isinstance(X, HyperbolaSet):
        p, q = X.p + 1, X.q + 1
        return "{x : " + f"x{p}*x{q} >= 1, x{p} >= 0, x{q} >= 0" + "}"
    if isinstance(X, HingeExpRange):
        w = X.weight
        f = [Interval.point(Fraction(0)) for _ in range(X.n)]
        f[X.p] = Interval(-w, Fraction(0), False, True)
        f[X.q] = Interval(Fraction(0), POS_INF, True)
        return "{" + S.render_vec(zeros(X.n)) + "} u " + render(Product(tuple(f)))
    if isinstance(X, (Polyhedron, ConeGen)):
        Q = as_product(X)
        if Q is not None:
            return render(Q)
        return _render_poly(as_polyhedron(X))
    raise TypeError(type(X))
