"""Monotone set-valued graphs and convex functions on the real line.

For a single-row A = aᵀ everything the m = 1 diagnostics need lives on a
line: the operator G(v) = a·∂f*(v·a), its resolvent, its inverse (the
parallel composition A▷∂f), and the function φ(v) = f*(v·a) whose
subdifferential inverts to ∂(A▷f).

Both objects are stored the same way: sorted breakpoints with a value at
each, and one open piece between consecutive breakpoints (plus the two
unbounded ends).  On an open piece a graph is single-valued and given by a
sympy expression in ``V`` (or is empty); at a breakpoint its value is an
Interval.  All comparisons go through the certified scalar layer.
"""
from __future__ import annotations

import functools
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import sympy as sp

from . import funcat as FC
from . import scalars as S
from . import setalg as SA
from .scalars import NEG_INF, POS_INF, Undecidable, is_inf
from .setalg import Interval

V = sp.Symbol("v", real=True)


class GraphError(Exception):
    pass


def _is_const(expr) -> bool:
    return not (isinstance(expr, sp.Basic) and V in expr.free_symbols)


def _limit(expr, end, side: str):
    """One-sided limit of expr at end (side '+' approaches from the right)."""
    if _is_const(expr):
        return S.norm(expr)
    target = S.to_sym(end)
    if is_inf(end):
        val = sp.limit(expr, V, target)
    else:
        val = sp.limit(expr, V, target, dir=side)
    if val in (sp.zoo, sp.nan) or isinstance(val, sp.AccumBounds):
        raise Undecidable(f"limit of {expr} at {end} is not a number")
    return S.norm(val)


def _subs(expr, v):
    if _is_const(expr):
        return S.norm(expr)
    return S.norm(sp.simplify(expr.subs(V, S.to_sym(v))))


def _sort_unique(values: Sequence) -> list:
    vals = sorted(values, key=functools.cmp_to_key(S.cmp))
    out = []
    for v in vals:
        if not out or not S.eq(out[-1], v):
            out.append(v)
    return out


def _between(lo, hi):
    """A rational strictly inside (lo, hi)."""
    if is_inf(lo) and is_inf(hi):
        return Fraction(0)
    if is_inf(lo):
        return Fraction(int(S.to_float(hi)) - 1)
    if is_inf(hi):
        return Fraction(int(S.to_float(lo)) + 1)
    if isinstance(lo, Fraction) and isinstance(hi, Fraction):
        return (lo + hi) / 2
    guess = Fraction((S.to_float(lo) + S.to_float(hi)) / 2).limit_denominator(10**6)
    if S.lt(lo, guess) and S.lt(guess, hi):
        return guess
    raise Undecidable("could not separate two close breakpoints")


@dataclass(frozen=True)
class Graph1D:
    """A monotone operator on ℝ.

    ``at[i]`` is the value at ``breaks[i]`` (None for empty).  ``pieces[j]``
    is the value on the open interval between ``breaks[j-1]`` and
    ``breaks[j]``: a sympy expression in V, or None.
    """

    breaks: tuple
    at: tuple
    pieces: tuple

    def __post_init__(self):
        if len(self.at) != len(self.breaks) or len(self.pieces) != len(self.breaks) + 1:
            raise GraphError("breakpoints, point values and pieces do not line up")

    @staticmethod
    def empty() -> "Graph1D":
        return Graph1D((), (), (None,))

    def piece_ends(self, j: int):
        lo = self.breaks[j - 1] if j > 0 else NEG_INF
        hi = self.breaks[j] if j < len(self.breaks) else POS_INF
        return lo, hi

    def locate(self, v):
        """('break', i) or ('piece', j) for the position of v."""
        v = S.norm(v)
        for i, t in enumerate(self.breaks):
            c = S.cmp(v, t)
            if c == 0:
                return "break", i
            if c < 0:
                return "piece", i
        return "piece", len(self.breaks)

    def evaluate(self, v) -> Interval | None:
        kind, k = self.locate(v)
        if kind == "break":
            return self.at[k]
        expr = self.pieces[k]
        return None if expr is None else Interval.point(_subs(expr, v))

    def is_empty(self) -> bool:
        return all(a is None for a in self.at) and all(p is None for p in self.pieces)

    # images ---------------------------------------------------------------

    def piece_image(self, j: int) -> Interval | None:
        expr = self.pieces[j]
        if expr is None:
            return None
        lo, hi = self.piece_ends(j)
        if _is_const(expr):
            return Interval.point(S.norm(expr))
        a = _limit(expr, lo, "+")
        b = _limit(expr, hi, "-")
        return Interval(a, b, True, True)

    def range(self) -> list[Interval]:
        parts = [iv for iv in self.at if iv is not None]
        parts += [self.piece_image(j) for j in range(len(self.pieces)) if self.pieces[j] is not None]
        return SA.interval_hull_union(parts)

    def domain(self) -> list[Interval]:
        parts = [Interval.point(t) for t, iv in zip(self.breaks, self.at) if iv is not None]
        for j, expr in enumerate(self.pieces):
            if expr is not None:
                lo, hi = self.piece_ends(j)
                parts.append(Interval(lo, hi, True, True))
        return SA.interval_hull_union(parts)

    def shift_identity(self) -> "Graph1D":
        """The graph of I + G."""
        at = tuple(None if iv is None else iv.shift(t) for t, iv in zip(self.breaks, self.at))
        pieces = tuple(None if e is None else S.to_sym(e) + V for e in self.pieces)
        return Graph1D(self.breaks, at, pieces)

    # inverse images -------------------------------------------------------

    def _solve_piece(self, j: int, y):
        """The v in piece j with G(v) = y, assuming y lies strictly inside its image."""
        expr = self.pieces[j]
        lo, hi = self.piece_ends(j)
        try:
            sols = sp.solve(sp.Eq(S.to_sym(expr), S.to_sym(y)), V)
        except NotImplementedError:
            sols = []
        for s in sols:
            s = S.norm(s)
            if isinstance(s, sp.Basic) and (s.free_symbols or not s.is_real):
                continue
            try:
                if S.lt(lo, s) and S.lt(s, hi):
                    return s
            except Undecidable:
                continue
        raise Undecidable(f"no closed-form root of {expr} = {S.render(y)} on ({S.render(lo)},{S.render(hi)})")

    def preimage(self, y) -> Interval | None:
        """{v : y ∈ G(v)}, a closed interval for a monotone G (or None)."""
        y = S.norm(y)
        parts = []
        for t, iv in zip(self.breaks, self.at):
            if iv is not None and iv.contains(y):
                parts.append(Interval.point(t))
        for j, expr in enumerate(self.pieces):
            if expr is None:
                continue
            if _is_const(expr):
                if S.eq(S.norm(expr), y):
                    lo, hi = self.piece_ends(j)
                    parts.append(Interval(lo, hi, True, True))
                continue
            img = self.piece_image(j)
            if img.contains(y):
                parts.append(Interval.point(self._solve_piece(j, y)))
        merged = SA.interval_hull_union(parts)
        if not merged:
            return None
        if len(merged) > 1:
            raise GraphError("preimage is not an interval; the graph is not monotone")
        return merged[0]

    def resolvent(self, b):
        """(I + G)⁻¹(b) as a single number, or None if b ∉ ran(I + G)."""
        pre = self.shift_identity().preimage(b)
        if pre is None:
            return None
        if not pre.is_point():
            raise GraphError("I + G is not strictly monotone")
        return pre.lo

    def inverse(self) -> "Graph1D":
        """The graph of G⁻¹ with breakpoints in the former value axis."""
        ys = []
        for iv in self.at:
            if iv is not None:
                ys += [e for e in (iv.lo, iv.hi) if not is_inf(e)]
        for j, expr in enumerate(self.pieces):
            if expr is not None:
                img = self.piece_image(j)
                ys += [e for e in (img.lo, img.hi) if not is_inf(e)]
        ys = _sort_unique(ys)
        at = []
        for y in ys:
            pre = self.preimage(y)
            at.append(pre)
        pieces = []
        for j in range(len(ys) + 1):
            lo = ys[j - 1] if j > 0 else NEG_INF
            hi = ys[j] if j < len(ys) else POS_INF
            sample = _between(lo, hi)
            pre = self.preimage(sample)
            if pre is None:
                pieces.append(None)
                continue
            if not pre.is_point():
                raise GraphError("inverse is multivalued on an open piece")
            v0 = pre.lo
            kind, k = self.locate(v0)
            if kind == "break":
                pieces.append(S.to_sym(v0))
                continue
            expr = S.to_sym(self.pieces[k])
            Y = sp.Dummy("y", real=True)
            branches = sp.solve(sp.Eq(expr, Y), V)
            chosen = None
            for br in branches:
                try:
                    if S.eq(S.norm(br.subs(Y, S.to_sym(sample))), v0):
                        chosen = br.subs(Y, V)
                        break
                except Undecidable:
                    continue
            if chosen is None:
                raise Undecidable(f"no symbolic inverse for {expr}")
            pieces.append(chosen)
        return Graph1D(tuple(ys), tuple(at), tuple(pieces))

    def with_break(self, t) -> "Graph1D":
        t = S.norm(t)
        kind, k = self.locate(t)
        if kind == "break":
            return self
        expr = self.pieces[k]
        val = None if expr is None else Interval.point(_subs(expr, t))
        return Graph1D(
            self.breaks[:k] + (t,) + self.breaks[k:],
            self.at[:k] + (val,) + self.at[k:],
            self.pieces[:k] + (expr, expr) + self.pieces[k + 1:],
        )

    def restrict(self, dom: Interval) -> "Graph1D":
        """Blank the graph outside dom."""
        g = self
        for end in (dom.lo, dom.hi):
            if not is_inf(end):
                g = g.with_break(end)
        at = tuple(iv if dom.contains(t) else None for t, iv in zip(g.breaks, g.at))
        pieces = []
        for j, expr in enumerate(g.pieces):
            lo, hi = g.piece_ends(j)
            inside = dom.contains_interval(Interval(lo, hi, True, True))
            pieces.append(expr if inside else None)
        return Graph1D(g.breaks, at, tuple(pieces))

    def render(self, var: str = "v") -> str:
        sym = sp.Symbol(var, real=True)
        clauses = []
        for j in range(len(self.pieces)):
            if j > 0:
                iv = self.at[j - 1]
                if iv is not None:
                    clauses.append(f"{iv.render()} if {var}={S.render(self.breaks[j - 1])}")
            expr = self.pieces[j]
            if expr is not None:
                lo, hi = self.piece_ends(j)
                span = Interval(lo, hi, True, True).render()
                body = S.render(S.norm(S.to_sym(expr).subs(V, sym)))
                where = "all " + var if span == "R" else f"{var} in {span}"
                clauses.append(f"{{{body}}} if {where}")
        if not clauses:
            return "empty"
        full = all(e is not None for e in self.pieces) and all(a is not None for a in self.at)
        return "; ".join(clauses) + ("" if full else "; empty otherwise")


# --------------------------------------------------------------------------
# convex functions on the line


@dataclass(frozen=True)
class PiecewiseFn1D:
    """A closed convex function on ℝ: value at each break, expression on each open piece.

    Values are exact scalars, POS_INF outside the domain.
    """

    breaks: tuple
    at: tuple
    pieces: tuple

    def subdiff_graph(self) -> Graph1D:
        derivs = []
        for j, expr in enumerate(self.pieces):
            derivs.append(None if is_inf(expr) else sp.diff(S.to_sym(expr), V))
        at = []
        for i, t in enumerate(self.breaks):
            if is_inf(self.at[i]):
                at.append(None)
                continue
            left, right = derivs[i], derivs[i + 1]
            dl = NEG_INF if left is None else _limit(left, t, "-")
            dr = POS_INF if right is None else _limit(right, t, "+")
            if (is_inf(dl) and dl.sign > 0) or (is_inf(dr) and dr.sign < 0):
                at.append(None)
            else:
                at.append(Interval(dl, dr))
        return Graph1D(self.breaks, tuple(at), tuple(derivs))


# --------------------------------------------------------------------------
# the operator G(v) = a·∂f*(v·a) and φ(v) = f*(v·a)


def _line_preimage(region: SA.ConvexSet, a_loc, c_loc) -> Interval | None:
    """{v : v·a − c ∈ region} for a product-shaped region."""
    if isinstance(region, SA.Point):
        factors = tuple(Interval.point(x) for x in region.coords)
    elif isinstance(region, SA.Product):
        factors = region.factors
    else:
        Q = SA.as_product(region)
        if Q is None:
            raise FC.UnsupportedAtom("cell region is not a product of intervals")
        factors = Q.factors
    J = Interval.real()
    for a, c, I in zip(a_loc, c_loc, factors):
        if a == 0:
            if not I.contains(-c):
                return None
            continue
        J = J.intersect(I.shift(c).scale(Fraction(1) / a))
        if J.is_empty():
            return None
    return J


def _symbolic_image(X: SA.ConvexSet, a) -> sp.Expr:
    """a·x for the unique value a·X takes (the set may be bigger than a point)."""
    if isinstance(X, SA.Point):
        return S.to_sym(S.vdot(a, X.coords))
    if isinstance(X, SA.Product):
        total = sp.Integer(0)
        for ai, f in zip(a, X.factors):
            if ai == 0:
                continue
            if is_inf(f.lo) or is_inf(f.hi) or S.sub(f.hi, f.lo) != 0:
                raise FC.UnsupportedAtom("set-valued conjugate subdifferential on an open piece")
            total += S.to_sym(S.mul(ai, f.lo))
        return total
    raise FC.UnsupportedAtom(f"{type(X).__name__} on an open piece")


@dataclass(frozen=True)
class LineSection:
    """f* restricted to the line {v·a : v ∈ ℝ}, split into pieces."""

    G: Graph1D
    phi: PiecewiseFn1D


def line_section(f: FC.FuncExpr, a: Sequence) -> LineSection:
    a = tuple(Fraction(x) for x in a)
    n = len(a)
    nf = FC.normal_form(f, n)
    const = sum((t.weight for t in nf.terms if t.kind == "const"), Fraction(0))
    per_block = []
    for b in FC.blocks(f, n):
        if b.kind in ("plN", "mixed"):
            raise FC.UnsupportedAtom(f"no line section through a {b.kind} block")
        a_loc = tuple(a[i] for i in b.coords)
        c_loc = tuple(nf.c[i] for i in b.coords)
        entries = []
        for cell in FC.block_cells(b):
            J = _line_preimage(cell.region, a_loc, c_loc)
            if J is not None:
                entries.append((J, cell))
        per_block.append((b, a_loc, c_loc, entries))

    ends = []
    for _, _, _, entries in per_block:
        for J, _ in entries:
            ends += [e for e in (J.lo, J.hi) if not is_inf(e)]
    breaks = _sort_unique(ends)

    def cells_at(v):
        chosen = []
        for b, a_loc, c_loc, entries in per_block:
            hit = next((cell for J, cell in entries if J.contains(v)), None)
            if hit is None:
                return None
            chosen.append((b, a_loc, c_loc, hit))
        return chosen

    def local_u(a_loc, c_loc, v):
        return tuple(S.sub(S.mul(x, v), c) for x, c in zip(a_loc, c_loc))

    def local_u_sym(a_loc, c_loc):
        return tuple(S.norm(S.to_sym(x) * V - S.to_sym(c)) for x, c in zip(a_loc, c_loc))

    g_at, phi_at = [], []
    for t in breaks:
        chosen = cells_at(t)
        if chosen is None:
            g_at.append(None)
            phi_at.append(POS_INF)
            continue
        val = S.neg(const)
        for b, a_loc, c_loc, cell in chosen:
            val = S.add(val, cell.value(local_u(a_loc, c_loc, t)))
        phi_at.append(val)
        if any(cell.subgrad is None for *_, cell in chosen):
            g_at.append(None)
            continue
        total = Interval.point(Fraction(0))
        for b, a_loc, c_loc, cell in chosen:
            img = SA.image_1d(cell.subgrad(local_u(a_loc, c_loc, t)), a_loc)
            if img is None:
                total = None
                break
            total = total + img
        g_at.append(total)

    g_pieces, phi_pieces = [], []
    for j in range(len(breaks) + 1):
        lo = breaks[j - 1] if j > 0 else NEG_INF
        hi = breaks[j] if j < len(breaks) else POS_INF
        chosen = cells_at(_between(lo, hi))
        if chosen is None:
            g_pieces.append(None)
            phi_pieces.append(POS_INF)
            continue
        val = -S.to_sym(const)
        for b, a_loc, c_loc, cell in chosen:
            val += S.to_sym(cell.value(local_u_sym(a_loc, c_loc)))
        phi_pieces.append(sp.simplify(val))
        if any(cell.subgrad is None for *_, cell in chosen):
            g_pieces.append(None)
            continue
        expr = sp.Integer(0)
        for b, a_loc, c_loc, cell in chosen:
            expr += _symbolic_image(cell.subgrad(local_u_sym(a_loc, c_loc)), a_loc)
        g_pieces.append(sp.simplify(expr))

    G = Graph1D(tuple(breaks), tuple(g_at), tuple(g_pieces))
    phi = PiecewiseFn1D(tuple(breaks), tuple(phi_at), tuple(phi_pieces))
    return LineSection(G, phi)


def infimal_subdiff(f: FC.FuncExpr, a: Sequence) -> Graph1D:
    """∂(A▷f) for A = aᵀ, as (∂φ)⁻¹ restricted to A(dom f).

    This equals ∂(A▷f) wherever A▷f agrees with its closure on A(dom f),
    which holds for every catalog atom.
    """
    sec = line_section(f, a)
    dom = SA.image_1d(FC.domain(f, len(a)), a)
    inv = sec.phi.subdiff_graph().inverse()
    return inv.restrict(dom)
