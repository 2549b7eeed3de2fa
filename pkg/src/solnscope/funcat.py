"""Catalog of convex atoms and what the diagnostics need to know about them.

A function is a tree of atoms (``Linear``, ``Abs``, ``Norm1``, ``Exp``,
``NegLog``, ``Hinge``, ``HingeExpDiff``, ``QuadShift``,
``HyperbolaIndicator``) combined with ``Scaled`` and ``Sum``.  Every
query first flattens the tree into a normal form: a linear vector plus a
list of weighted nonlinear terms.  Terms that share coordinates are grouped
into blocks; the conjugate subdifferential of a separable sum is the
Cartesian product of the blocks' conjugate subdifferentials, evaluated at
u − c where c is the linear part.

Each block knows its conjugate as a finite list of cells: a region of
u-space together with the value of ∂g* (and g*) on it.  Cells are built so
they can be evaluated either at exact numbers or at sympy symbols, which is
how the report renders piecewise formulas.
"""
from __future__ import annotations

import functools
import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import sympy as sp

from . import lp
from . import scalars as S
from . import setalg as SA
from .ratlin import vec, zeros
from .scalars import NEG_INF, POS_INF, is_inf
from .setalg import Interval

PL_EXPANSION_LIMIT = 4096


class FuncError(Exception):
    pass


class DomainViolation(FuncError):
    pass


class UnsupportedAtom(FuncError):
    """The query has no exact route for this combination of atoms."""


# --------------------------------------------------------------------------
# expression tree


@dataclass(frozen=True)
class Affine:
    """Σ coeffs[i]·x_i + const, with 0-based indices."""

    coeffs: tuple = ()  # ((index, Fraction), ...)
    const: Fraction = Fraction(0)

    def __post_init__(self):
        merged: dict[int, Fraction] = {}
        for i, c in self.coeffs:
            merged[int(i)] = merged.get(int(i), Fraction(0)) + Fraction(c)
        object.__setattr__(self, "coeffs", tuple(sorted((i, c) for i, c in merged.items() if c != 0)))
        object.__setattr__(self, "const", Fraction(self.const))

    def support(self) -> tuple:
        return tuple(i for i, _ in self.coeffs)

    def vector(self, n: int) -> tuple:
        v = [Fraction(0)] * n
        for i, c in self.coeffs:
            v[i] = c
        return tuple(v)

    def value(self, x):
        total = self.const
        for i, c in self.coeffs:
            total = S.add(total, S.mul(c, x[i]))
        return total

    def render(self) -> str:
        parts = []
        for i, c in self.coeffs:
            mag = abs(c)
            body = f"x{i + 1}" if mag == 1 else f"{S.render(mag)}*x{i + 1}"
            parts.append(("-" if c < 0 else "+", body))
        if self.const != 0 or not parts:
            parts.append(("-" if self.const < 0 else "+", S.render(abs(self.const))))
        text = ("-" if parts[0][0] == "-" else "") + parts[0][1]
        for sgn, body in parts[1:]:
            text += f" {sgn} {body}"
        return text


class FuncExpr:
    def __add__(self, other):
        return Sum((self, other))

    def __rmul__(self, k):
        return Scaled(Fraction(k), self)


@dataclass(frozen=True)
class Linear(FuncExpr):
    c: tuple


@dataclass(frozen=True)
class Abs(FuncExpr):
    index: int


@dataclass(frozen=True)
class Norm1(FuncExpr):
    pass


@dataclass(frozen=True)
class Exp(FuncExpr):
    arg: Affine


@dataclass(frozen=True)
class NegLog(FuncExpr):
    arg: Affine


@dataclass(frozen=True)
class Hinge(FuncExpr):
    arg: Affine


@dataclass(frozen=True)
class HingeExpDiff(FuncExpr):
    """max{e^{x_j} − x_i, 0}."""

    i: int
    j: int


@dataclass(frozen=True)
class QuadShift(FuncExpr):
    """½(x_index − a)²."""

    index: int
    a: Fraction = Fraction(0)


@dataclass(frozen=True)
class HyperbolaIndicator(FuncExpr):
    """Indicator of {x_i·x_j ≥ 1, x_i ≥ 0, x_j ≥ 0}."""

    i: int
    j: int


@dataclass(frozen=True)
class Scaled(FuncExpr):
    weight: Fraction
    inner: FuncExpr


@dataclass(frozen=True)
class Sum(FuncExpr):
    terms: tuple


def render_expr(f: FuncExpr) -> str:
    if isinstance(f, Linear):
        return "lin(" + ",".join(S.render(c) for c in f.c) + ")"
    if isinstance(f, Abs):
        return f"abs(x{f.index + 1})"
    if isinstance(f, Norm1):
        return "norm1()"
    if isinstance(f, Exp):
        return f"exp({f.arg.render()})"
    if isinstance(f, NegLog):
        return f"neglog({f.arg.render()})"
    if isinstance(f, Hinge):
        return f"hinge({f.arg.render()})"
    if isinstance(f, HingeExpDiff):
        return f"hinge_expdiff(x{f.i + 1},x{f.j + 1})"
    if isinstance(f, QuadShift):
        return f"quadshift(x{f.index + 1},{S.render(f.a)})"
    if isinstance(f, HyperbolaIndicator):
        return f"hypind(x{f.i + 1},x{f.j + 1})"
    if isinstance(f, Scaled):
        return f"{S.render(f.weight)}*{render_expr(f.inner)}"
    if isinstance(f, Sum):
        return " + ".join(render_expr(t) for t in f.terms)
    raise TypeError(type(f))


def max_index(f: FuncExpr) -> int:
    """Largest coordinate index read by f (−1 if none)."""
    if isinstance(f, Linear):
        return len(f.c) - 1
    if isinstance(f, (Abs, QuadShift)):
        return f.index
    if isinstance(f, (Exp, NegLog, Hinge)):
        return max(f.arg.support(), default=-1)
    if isinstance(f, (HingeExpDiff, HyperbolaIndicator)):
        return max(f.i, f.j)
    if isinstance(f, Scaled):
        return max_index(f.inner)
    if isinstance(f, Sum):
        return max((max_index(t) for t in f.terms), default=-1)
    return -1


# --------------------------------------------------------------------------
# normal form


@dataclass(frozen=True)
class Term:
    kind: str  # abs | hinge | exp | neglog | quad | hexp | hyp
    weight: Fraction
    coords: tuple  # global coordinates the term reads
    alpha: Fraction = Fraction(0)  # 1-D slope for exp/neglog/hinge restricted to one coordinate
    beta: Fraction = Fraction(0)  # offset (or the shift a of quad)
    aff: Affine | None = None  # hinge argument


@dataclass(frozen=True)
class NormalForm:
    n: int
    c: tuple
    terms: tuple


def _flatten(f: FuncExpr, weight: Fraction, n: int, lin: list, out: list) -> None:
    if isinstance(f, Sum):
        for t in f.terms:
            _flatten(t, weight, n, lin, out)
        return
    if isinstance(f, Scaled):
        if f.weight <= 0 and not isinstance(f.inner, Linear):
            raise UnsupportedAtom("only nonnegative weights keep an atom convex")
        if f.weight == 0:
            return
        _flatten(f.inner, weight * f.weight, n, lin, out)
        return
    if max_index(f) >= n:
        raise UnsupportedAtom(f"{render_expr(f)} reads a coordinate beyond n = {n}")
    if isinstance(f, Linear):
        for i, c in enumerate(f.c):
            lin[i] += weight * Fraction(c)
    elif isinstance(f, Abs):
        out.append(Term("abs", weight, (f.index,)))
    elif isinstance(f, Norm1):
        for i in range(n):
            out.append(Term("abs", weight, (i,)))
    elif isinstance(f, Hinge):
        supp = f.arg.support()
        if not supp:
            const = max(f.arg.const, Fraction(0))
            if const:
                out.append(Term("const", weight * const, ()))
            return
        alpha = f.arg.coeffs[0][1] if len(supp) == 1 else Fraction(0)
        out.append(Term("hinge", weight, supp, alpha, f.arg.const, f.arg))
    elif isinstance(f, (Exp, NegLog)):
        supp = f.arg.support()
        if len(supp) != 1:
            raise UnsupportedAtom(f"{render_expr(f)}: exp/neglog need an argument in exactly one variable")
        kind = "exp" if isinstance(f, Exp) else "neglog"
        out.append(Term(kind, weight, supp, f.arg.coeffs[0][1], f.arg.const))
    elif isinstance(f, QuadShift):
        out.append(Term("quad", weight, (f.index,), Fraction(1), Fraction(f.a)))
    elif isinstance(f, HingeExpDiff):
        if f.i == f.j:
            raise UnsupportedAtom("hinge_expdiff needs two distinct coordinates")
        out.append(Term("hexp", weight, (f.i, f.j)))
    elif isinstance(f, HyperbolaIndicator):
        if f.i == f.j:
            raise UnsupportedAtom("hypind needs two distinct coordinates")
        out.append(Term("hyp", Fraction(1), (f.i, f.j)))
    else:
        raise UnsupportedAtom(f"unknown atom {type(f).__name__}")


@functools.lru_cache(maxsize=512)
def normal_form(f: FuncExpr, n: int) -> NormalForm:
    lin = [Fraction(0)] * n
    out: list[Term] = []
    _flatten(f, Fraction(1), n, lin, out)
    return NormalForm(n, tuple(lin), tuple(out))


def is_polyhedral(f: FuncExpr, n: int) -> bool:
    return all(t.kind in ("abs", "hinge", "const") for t in normal_form(f, n).terms)


def is_piecewise_quadratic(f: FuncExpr, n: int) -> bool:
    return all(t.kind in ("abs", "hinge", "const", "quad") for t in normal_form(f, n).terms)


def is_pure_norm1(f: FuncExpr, n: int) -> Fraction | None:
    """The weight w when f = w·‖·‖₁ exactly, else None."""
    nf = normal_form(f, n)
    if any(nf.c) or len(nf.terms) != n or any(t.kind != "abs" for t in nf.terms):
        return None
    ws = {t.weight for t in nf.terms}
    coords = sorted(t.coords[0] for t in nf.terms)
    if len(ws) == 1 and coords == list(range(n)):
        return ws.pop()
    return None


# --------------------------------------------------------------------------
# evaluation


def _term_value(t: Term, x):
    if t.kind == "const":
        return t.weight
    if t.kind == "abs":
        v = x[t.coords[0]]
        return S.mul(t.weight, v if S.sign(v) >= 0 else S.neg(v))
    if t.kind == "hinge":
        v = t.aff.value(x)
        return S.mul(t.weight, v) if S.sign(v) > 0 else Fraction(0)
    if t.kind == "exp":
        return S.mul(t.weight, S.exp(S.add(S.mul(t.alpha, x[t.coords[0]]), t.beta)))
    if t.kind == "neglog":
        arg = S.add(S.mul(t.alpha, x[t.coords[0]]), t.beta)
        if S.sign(arg) <= 0:
            return POS_INF
        return S.neg(S.mul(t.weight, S.log(arg)))
    if t.kind == "quad":
        d = S.sub(x[t.coords[0]], t.beta)
        return S.mul(t.weight / 2, S.mul(d, d))
    if t.kind == "hexp":
        i, j = t.coords
        v = S.sub(S.exp(x[j]), x[i])
        return S.mul(t.weight, v) if S.sign(v) > 0 else Fraction(0)
    if t.kind == "hyp":
        i, j = t.coords
        ok = S.sign(x[i]) >= 0 and S.sign(x[j]) >= 0 and S.le(Fraction(1), S.mul(x[i], x[j]))
        return Fraction(0) if ok else POS_INF
    raise TypeError(t.kind)


def eval_f(f: FuncExpr, x: Sequence):
    """f(x) as an exact scalar, or POS_INF outside dom f."""
    x = tuple(S.norm(v) for v in x)
    nf = normal_form(f, len(x))
    total = S.vdot(nf.c, x)
    for t in nf.terms:
        v = _term_value(t, x)
        if is_inf(v):
            return POS_INF
        total = S.add(total, v)
    return total


def domain(f: FuncExpr, n: int) -> SA.ConvexSet:
    nf = normal_form(f, n)
    rows = []
    atoms = []
    for t in nf.terms:
        if t.kind == "neglog":
            a = [Fraction(0)] * n
            a[t.coords[0]] = -t.alpha
            rows.append((tuple(a), t.beta, True))
        elif t.kind == "hyp":
            atoms.append(t)
    if atoms:
        if rows or len(atoms) > 1:
            raise UnsupportedAtom("domain mixes a hyperbola indicator with other restrictions")
        return SA.HyperbolaSet(n, *atoms[0].coords)
    if not rows:
        return SA.whole_space(n)
    P = SA.Polyhedron(n, tuple(rows))
    Q = SA.as_product(P)
    return Q if Q is not None else P


# --------------------------------------------------------------------------
# subdifferential


@dataclass
class SubdiffParts:
    """∂f(x) = point + Σ [0,1]·segments + Σ ℝ₊·rays."""

    point: tuple
    segments: list = field(default_factory=list)
    rays: list = field(default_factory=list)


def _unit(n, i, scale=Fraction(1)):
    v = [Fraction(0)] * n
    v[i] = S.norm(scale)
    return tuple(v)


def subdiff_parts(f: FuncExpr, x: Sequence) -> SubdiffParts:
    x = tuple(S.norm(v) for v in x)
    n = len(x)
    nf = normal_form(f, n)
    point = nf.c
    segs, rays = [], []
    for t in nf.terms:
        k = t.kind
        if k == "const":
            continue
        if k == "abs":
            i = t.coords[0]
            s = S.sign(x[i])
            if s == 0:
                point = S.vsub(point, _unit(n, i, t.weight))
                segs.append(_unit(n, i, 2 * t.weight))
            else:
                point = S.vadd(point, _unit(n, i, t.weight * s))
        elif k == "hinge":
            s = S.sign(t.aff.value(x))
            g = tuple(t.weight * a for a in t.aff.vector(n))
            if s > 0:
                point = S.vadd(point, g)
            elif s == 0:
                segs.append(g)
        elif k == "exp":
            i = t.coords[0]
            val = S.mul(t.weight * t.alpha, S.exp(S.add(S.mul(t.alpha, x[i]), t.beta)))
            point = S.vadd(point, _unit(n, i, val))
        elif k == "neglog":
            i = t.coords[0]
            arg = S.add(S.mul(t.alpha, x[i]), t.beta)
            if S.sign(arg) <= 0:
                raise DomainViolation(f"x{i + 1} outside the domain of neglog")
            point = S.vadd(point, _unit(n, i, S.div(-t.weight * t.alpha, arg)))
        elif k == "quad":
            i = t.coords[0]
            point = S.vadd(point, _unit(n, i, S.mul(t.weight, S.sub(x[i], t.beta))))
        elif k == "hexp":
            i, j = t.coords
            ej = S.exp(x[j])
            s = S.cmp(ej, x[i])
            g = [Fraction(0)] * n
            g[i] = -t.weight
            g[j] = S.mul(t.weight, ej)
            if s > 0:
                point = S.vadd(point, tuple(g))
            elif s == 0:
                segs.append(tuple(S.norm(v) for v in g))
        elif k == "hyp":
            i, j = t.coords
            if _term_value(t, x) is POS_INF:
                raise DomainViolation("point outside the hyperbola region")
            if S.eq(S.mul(x[i], x[j]), Fraction(1)):
                r = [Fraction(0)] * n
                r[i] = S.neg(x[j])
                r[j] = S.neg(x[i])
                rays.append(tuple(S.norm(v) for v in r))
        else:
            raise TypeError(k)
    return SubdiffParts(point, segs, rays)


def subdiff(f: FuncExpr, x: Sequence) -> SA.ConvexSet:
    """∂f(x); raises DomainViolation outside dom f."""
    n = len(x)
    if is_inf(eval_f(f, x)):
        raise DomainViolation("x is outside dom f")
    parts = subdiff_parts(f, x)
    return _zonotope(n, parts)


def _zonotope(n: int, parts: SubdiffParts) -> SA.ConvexSet:
    if not parts.segments and not parts.rays:
        return SA.Point(parts.point)
    gens = parts.segments + parts.rays
    if all(S.is_rational_vec(g) for g in gens) and S.is_rational_vec(parts.point):
        k = len(gens)
        nv = n + k
        eqs = []
        for i in range(n):
            a = [Fraction(0)] * nv
            a[i] = Fraction(1)
            for j, g in enumerate(gens):
                a[n + j] = -g[i]
            eqs.append((tuple(a), parts.point[i]))
        ineqs = []
        for j in range(k):
            e = [Fraction(0)] * nv
            e[n + j] = Fraction(1)
            ineqs.append((tuple(-v for v in e), Fraction(0), False))
            if j < len(parts.segments):
                ineqs.append((tuple(e), Fraction(1), False))
        rows, eq_rows = lp.fourier_motzkin(nv, ineqs, eqs, list(range(n, nv)))
        P = SA.Polyhedron(n, tuple(rows), tuple(eq_rows))
        Q = SA.as_product(P)
        return Q if Q is not None else P
    if len(parts.segments) == 1 and not parts.rays:
        g = parts.segments[0]
        return SA.Segment(parts.point, S.vadd(parts.point, g))
    raise UnsupportedAtom("subdifferential with several symbolic generators")


def descent_cone(f: FuncExpr, x: Sequence) -> SA.ConvexSet:
    """D_f(x) closure: {d : f'(x; d) ≤ 0} = polar of cone(∂f(x))."""
    n = len(x)
    parts = subdiff_parts(f, x)
    gens = parts.segments
    if not all(S.is_rational_vec(g) for g in gens + parts.rays + [parts.point]):
        raise UnsupportedAtom("descent cone with symbolic subgradients")
    if 2 ** len(gens) > PL_EXPANSION_LIMIT:
        raise UnsupportedAtom("too many kinks for the descent cone expansion")
    rows = []
    for mask in itertools.product((0, 1), repeat=len(gens)):
        a = list(parts.point)
        for bit, g in zip(mask, gens):
            if bit:
                a = [p + q for p, q in zip(a, g)]
        rows.append((tuple(a), Fraction(0), False))
    rows += [(r, Fraction(0), False) for r in parts.rays]
    return _simplify_poly(SA.Polyhedron(n, tuple(lp._dedupe(rows))))


def _simplify_poly(P: SA.Polyhedron) -> SA.ConvexSet:
    if SA.is_empty(P):
        return SA.Empty(P.n)
    rows = lp.remove_redundant(list(P.ineqs), P.eqs) if P.ineqs else []
    P = SA.Polyhedron(P.n, tuple(rows), P.eqs)
    Q = SA.as_product(P)
    return Q if Q is not None else P


# --------------------------------------------------------------------------
# blocks and conjugate cells


@dataclass(frozen=True)
class Cell:
    """On ``region`` (local u-space), ∂g*(u) = subgrad(u) and g*(u) = value(u)."""

    region: SA.ConvexSet
    subgrad: Callable | None  # None: ∂g* is empty on the region (g* finite there)
    value: Callable


@dataclass(frozen=True)
class Block:
    kind: str  # zero | pl1 | plN | plq | exp | neglog | quad | hexp | hyp
    coords: tuple
    terms: tuple


def blocks(f: FuncExpr, n: int) -> list[Block]:
    nf = normal_form(f, n)
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for t in nf.terms:
        for a, b in zip(t.coords, t.coords[1:]):
            parent[find(a)] = find(b)
    groups: dict[int, list[int]] = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    out = []
    for root in sorted(groups, key=lambda r: min(groups[r])):
        coords = tuple(sorted(groups[root]))
        terms = tuple(t for t in nf.terms if t.coords and find(t.coords[0]) == root)
        kinds = {t.kind for t in terms}
        if not terms:
            kind = "zero"
        elif kinds <= {"abs", "hinge"}:
            kind = "pl1" if len(coords) == 1 else "plN"
        elif len(terms) == 1:
            kind = terms[0].kind
        elif len(coords) == 1 and kinds <= {"abs", "hinge", "quad"}:
            kind = "plq"
        else:
            kind = "mixed"
        out.append(Block(kind, coords, terms))
    return out


def _pl1_profile(block: Block):
    """Kinks κ₁<…<κ_k, slopes s₀<…<s_k and g(κ_j) of a 1-D piecewise-linear block."""
    i = block.coords[0]
    pieces = []  # (slope1, icept1, slope2, icept2) per term, g = Σ max(...)
    for t in block.terms:
        if t.kind == "abs":
            pieces.append((t.weight, Fraction(0), -t.weight, Fraction(0)))
        else:
            pieces.append((t.weight * t.alpha, t.weight * t.beta, Fraction(0), Fraction(0)))
    kinks = sorted({(ib - ia) / (sa - sb) for sa, ia, sb, ib in pieces if sa != sb})

    def g(x):
        return sum(max(sa * x + ia, sb * x + ib) for sa, ia, sb, ib in pieces)

    def slope(x):
        return sum(sa if sa * x + ia >= sb * x + ib else sb for sa, ia, sb, ib in pieces)

    probes = []
    if not kinks:
        probes = [Fraction(0)]
    else:
        probes.append(kinks[0] - 1)
        probes += [(a + b) / 2 for a, b in zip(kinks, kinks[1:])]
        probes.append(kinks[-1] + 1)
    slopes = [slope(p) for p in probes]
    return kinks, slopes, [g(k) for k in kinks], g, i


def _plq_cells(block: Block) -> list[Cell]:
    """One coordinate, g = pl(x) + (W/2)x² − c·x + d with W > 0.

    ∂g(x) = ∂pl(x) + Wx − c is single-valued between kinks and a segment at
    each kink, so its inverse is piecewise affine in u.
    """
    quads = [t for t in block.terms if t.kind == "quad"]
    W = sum((t.weight for t in quads), Fraction(0))
    c = sum((t.weight * t.beta for t in quads), Fraction(0))
    d = sum((t.weight * t.beta * t.beta / 2 for t in quads), Fraction(0))
    pl = Block("pl1", block.coords, tuple(t for t in block.terms if t.kind != "quad"))
    if pl.terms:
        kinks, slopes, gk, g, _ = _pl1_profile(pl)
    else:
        kinks, slopes, gk, g = [], [Fraction(0)], [], (lambda x: Fraction(0))

    def value(u, x, s, t):
        # u x − (s x + t) − (W/2) x² + c x − d
        quad = S.sub(S.mul(W / 2, S.mul(x, x)), S.mul(c, x))
        return S.sub(S.sub(S.sub(S.mul(u[0], x), S.add(S.mul(s, x), t)), quad), d)

    cells = []
    m = len(kinks)
    for j in range(m + 1):
        lo = kinks[j - 1] if j > 0 else NEG_INF
        hi = kinks[j] if j < m else POS_INF
        s = slopes[j]
        anchor = kinks[j] if j < m else (kinks[j - 1] if m else Fraction(0))
        t = (gk[j] if j < m else (gk[j - 1] if m else g(Fraction(0)))) - s * anchor
        u_lo = NEG_INF if S.is_inf(lo) else s + W * lo - c
        u_hi = POS_INF if S.is_inf(hi) else s + W * hi - c

        def x_of(u, s=s):
            return S.div(S.add(S.sub(u[0], s), c), W)

        cells.append(Cell(SA.Product((Interval(u_lo, u_hi, True, True),)),
                          lambda u, x_of=x_of: SA.Point((x_of(u),)),
                          lambda u, x_of=x_of, s=s, t=t: value(u, x_of(u), s, t)))
        if j < m:
            kk = kinks[j]
            region = SA.Product((Interval(s + W * kk - c, slopes[j + 1] + W * kk - c),))
            cells.append(Cell(region, lambda u, kk=kk: SA.Point((kk,)),
                              lambda u, kk=kk, gv=gk[j]: value(u, kk, Fraction(0), gv)))
    return cells


def block_cells(block: Block) -> list[Cell]:
    """Cells of the block conjugate in local coordinates (u relative to the linear part)."""
    k = block.kind
    if k == "plq":
        return _plq_cells(block)
    if k == "zero":
        return [Cell(SA.origin(1), lambda u: SA.whole_space(1), lambda u: Fraction(0))]
    if k == "pl1":
        kinks, slopes, gk, g, _ = _pl1_profile(block)
        if not kinks:
            s0 = slopes[0]
            c0 = g(Fraction(0))
            return [Cell(SA.Point((s0,)), lambda u: SA.whole_space(1), lambda u, c0=c0: -c0)]
        cells = []
        m = len(kinks)
        for j in range(m + 1):
            lo = kinks[j - 1] if j > 0 else NEG_INF
            hi = kinks[j] if j < m else POS_INF
            sub = SA.Product((Interval(lo, hi),))
            # on the slope value s_j the conjugate is linear through either neighbouring kink
            kk = kinks[j] if j < m else kinks[j - 1]
            gval = gk[j] if j < m else gk[j - 1]
            cells.append(
                Cell(SA.Point((slopes[j],)), lambda u, sub=sub: sub,
                     lambda u, kk=kk, gval=gval: S.sub(S.mul(kk, u[0]), gval))
            )
            if j < m:
                region = SA.Product((Interval(slopes[j], slopes[j + 1], True, True),))
                pt = SA.Point((kinks[j],))
                cells.append(
                    Cell(region, lambda u, pt=pt: pt,
                         lambda u, kk=kinks[j], gval=gk[j]: S.sub(S.mul(kk, u[0]), gval))
                )
        return cells
    if k in ("exp", "neglog", "quad"):
        t = block.terms[0]
        w, al, be = t.weight, t.alpha, t.beta
        if k == "quad":
            return [Cell(SA.whole_space(1),
                         lambda u: SA.Point((S.add(be, S.div(u[0], w)),)),
                         lambda u: S.add(S.mul(be, u[0]), S.div(S.mul(u[0], u[0]), 2 * w)))]
        if k == "exp":
            region = SA.Product((Interval(0, POS_INF, True) if al > 0 else Interval(NEG_INF, 0, True, True),))

            def sub_exp(u):
                return SA.Point((S.div(S.sub(S.log(S.div(u[0], w * al)), be), al),))

            def val_exp(u):
                kk = S.div(u[0], al)
                return S.sub(S.mul(kk, S.sub(S.log(S.div(kk, w)), 1)), S.mul(kk, be))

            return [Cell(region, sub_exp, val_exp), Cell(SA.origin(1), None, lambda u: Fraction(0))]
        region = SA.Product((Interval(NEG_INF, 0, True, True) if al > 0 else Interval(0, POS_INF, True),))

        def sub_nl(u):
            return SA.Point((S.div(S.sub(S.div(-w * al, u[0]), be), al),))

        def val_nl(u):
            kk = S.div(u[0], al)
            return S.sub(S.add(-w, S.mul(w, S.log(S.div(-w, kk)))), S.mul(kk, be))

        return [Cell(region, sub_nl, val_nl)]
    if k == "hexp":
        w = block.terms[0].weight
        p, q = _local_pair(block)

        def pair(u):
            return S.div(u[p], w), S.div(u[q], w)

        def on_edge(u):
            _, sq = pair(u)
            f = [None, None]
            f[p] = Interval(NEG_INF, sq)
            f[q] = Interval.point(S.log(sq))
            return SA.Product(tuple(f))

        def interior(u):
            sp_, sq = pair(u)
            ratio = S.neg(S.div(sq, sp_))
            pt = [None, None]
            pt[p] = ratio
            pt[q] = S.log(ratio)
            return SA.Point(tuple(pt))

        def f_open(u):
            sp_, sq = pair(u)
            return S.mul(w, S.sub(S.mul(sq, S.log(S.neg(S.div(sq, sp_)))), sq))

        def region(fp, fq):
            f = [None, None]
            f[p], f[q] = fp, fq
            return SA.Product(tuple(f))

        pos = Interval(0, POS_INF, True)
        return [
            Cell(region(Interval.point(0), Interval.point(0)),
                 lambda u: SA.ExpHypograph(2, p, q), lambda u: Fraction(0)),
            Cell(region(Interval.point(-w), pos), on_edge, f_open),
            Cell(region(Interval(-w, 0, True, True), pos), interior, f_open),
            # f* is finite but ∂f* empty on the rest of [−w,0]×{0}
            Cell(region(Interval(-w, 0, False, True), Interval.point(0)), None, lambda u: Fraction(0)),
        ]
    if k == "hyp":
        p, q = _local_pair(block)

        def corner(u):
            pt = [None, None]
            pt[p] = S.sqrt(S.div(u[q], u[p]))
            pt[q] = S.sqrt(S.div(u[p], u[q]))
            return SA.Point(tuple(pt))

        neg = Interval(NEG_INF, 0, True, True)
        edge_cells = []
        for fp, fq in ((Interval.point(0), neg), (neg, Interval.point(0))):
            edge_cells.append(Cell(SA.Product((fp, fq) if p == 0 else (fq, fp)), None, lambda u: Fraction(0)))
        return [
            Cell(SA.origin(2), lambda u: SA.HyperbolaSet(2, p, q), lambda u: Fraction(0)),
            Cell(SA.Product((neg, neg)), corner,
                 lambda u: S.mul(-2, S.sqrt(S.mul(u[p], u[q])))),
        ] + edge_cells
    raise UnsupportedAtom(f"no conjugate cells for a {k} block")


def _local_pair(block: Block):
    """Local positions of (p, q) for two-coordinate atoms (p is the linear one)."""
    t = block.terms[0]
    gi, gj = t.coords
    return block.coords.index(gi), block.coords.index(gj)


def _plN_conj_subdiff(block: Block, u: tuple) -> SA.ConvexSet:
    """∂g*(u) for a multi-coordinate piecewise-linear block, via an exact LP."""
    k = len(block.coords)
    pos = {c: i for i, c in enumerate(block.coords)}
    pieces = []
    for t in block.terms:
        if t.kind == "abs":
            e = [Fraction(0)] * k
            e[pos[t.coords[0]]] = t.weight
            pieces.append(((tuple(e), Fraction(0)), (tuple(-v for v in e), Fraction(0))))
        else:
            a = [Fraction(0)] * k
            for i, c in t.aff.coeffs:
                a[pos[i]] = t.weight * c
            pieces.append(((tuple(a), t.weight * t.aff.const), (tuple([Fraction(0)] * k), Fraction(0))))
    K = len(pieces)
    # min Σ t_j − u·x  s.t.  t_j ≥ a·x + b for both pieces of term j
    cost = tuple(-v for v in u) + (Fraction(1),) * K
    A_ub, b_ub = [], []
    for j, pr in enumerate(pieces):
        for a, b in pr:
            row = list(a) + [Fraction(0)] * K
            row[k + j] = Fraction(-1)
            A_ub.append(row)
            b_ub.append(-b)
    res = lp.linprog(cost, A_ub, b_ub)
    if res.status != "optimal":
        return SA.Empty(k)
    opt = res.value
    if 2 ** K > PL_EXPANSION_LIMIT:
        raise UnsupportedAtom("piecewise-linear block too large to expand")
    rows = []
    for choice in itertools.product((0, 1), repeat=K):
        a = [-v for v in u]
        b = opt
        for j, ch in enumerate(choice):
            pa, pb = pieces[j][ch]
            a = [x + y for x, y in zip(a, pa)]
            b -= pb
        rows.append((tuple(a), b, False))
    return _simplify_poly(SA.Polyhedron(k, tuple(lp._dedupe(rows))))


def _plN_range(block: Block) -> SA.ConvexSet:
    k = len(block.coords)
    pos = {c: i for i, c in enumerate(block.coords)}
    parts = SubdiffParts(zeros(k))
    for t in block.terms:
        if t.kind == "abs":
            e = [Fraction(0)] * k
            e[pos[t.coords[0]]] = t.weight
            parts.point = S.vsub(parts.point, tuple(e))
            parts.segments.append(tuple(2 * v for v in e))
        else:
            a = [Fraction(0)] * k
            for i, c in t.aff.coeffs:
                a[pos[i]] = t.weight * c
            parts.segments.append(tuple(a))
    return _zonotope(k, parts)


def block_conj_subdiff(block: Block, u: tuple) -> SA.ConvexSet:
    k = len(block.coords)
    if block.kind == "plN":
        return _plN_conj_subdiff(block, u)
    for cell in block_cells(block):
        if SA.contains_point(cell.region, u):
            return SA.Empty(k) if cell.subgrad is None else cell.subgrad(u)
    return SA.Empty(k)


def block_conj_value(block: Block, u: tuple):
    if block.kind == "plN":
        raise UnsupportedAtom("conjugate value of a multi-coordinate piecewise-linear block")
    for cell in block_cells(block):
        if SA.contains_point(cell.region, u):
            return cell.value(u)
    return POS_INF


def block_range(block: Block) -> SA.ConvexSet:
    """ran ∂g for the block (local coordinates)."""
    k = block.kind
    if k == "zero":
        return SA.origin(1)
    if k == "pl1":
        _, slopes, _, _, _ = _pl1_profile(block)
        return SA.Product((Interval(slopes[0], slopes[-1]),))
    if k == "plN":
        return _plN_range(block)
    if k == "plq":
        return SA.whole_space(1)
    if k in ("exp", "neglog", "quad"):
        cells = [c for c in block_cells(block) if c.subgrad is not None]
        return cells[0].region
    if k == "hexp":
        p, q = _local_pair(block)
        return SA.HingeExpRange(2, p, q, block.terms[0].weight)
    raise UnsupportedAtom(f"range of the subdifferential for a {k} block")


def _local(u, coords):
    return tuple(u[i] for i in coords)


def conj_subdiff(f: FuncExpr, u: Sequence) -> SA.ConvexSet:
    """∂f*(u) = (∂f)⁻¹(u)."""
    u = tuple(S.norm(v) for v in u)
    n = len(u)
    nf = normal_form(f, n)
    w = S.vsub(u, nf.c)
    parts = []
    for b in blocks(f, n):
        part = block_conj_subdiff(b, _local(w, b.coords))
        if SA.is_empty(part):
            return SA.Empty(n)
        parts.append((b.coords, part))
    return SA.cartesian(n, parts)


def conj_value(f: FuncExpr, u: Sequence):
    """f*(u) (POS_INF outside dom f*)."""
    u = tuple(S.norm(v) for v in u)
    n = len(u)
    nf = normal_form(f, n)
    w = S.vsub(u, nf.c)
    const = sum((t.weight for t in nf.terms if t.kind == "const"), Fraction(0))
    total = -const
    for b in blocks(f, n):
        v = block_conj_value(b, _local(w, b.coords))
        if is_inf(v):
            return POS_INF
        total = S.add(total, v)
    return total


def range_subdiff(f: FuncExpr, n: int) -> SA.ConvexSet:
    """ran ∂f."""
    nf = normal_form(f, n)
    parts = [(b.coords, block_range(b)) for b in blocks(f, n)]
    return SA.translate(SA.cartesian(n, parts), nf.c)


def relative_interior_range(f: FuncExpr, n: int) -> SA.ConvexSet:
    nf = normal_form(f, n)
    parts = []
    for b in blocks(f, n):
        R = block_range(b)
        if isinstance(R, SA.HingeExpRange):
            w = R.weight
            fac = [None, None]
            fac[R.p] = Interval(-w, 0, True, True)
            fac[R.q] = Interval(0, POS_INF, True)
            parts.append((b.coords, SA.Product(tuple(fac))))
        else:
            parts.append((b.coords, SA.relative_interior(R)))
    return SA.translate(SA.cartesian(n, parts), nf.c)


def symbols(n: int, name: str = "u") -> tuple:
    return tuple(sp.Symbol(f"{name}{i + 1}", real=True) for i in range(n))


def global_cells(f: FuncExpr, n: int, limit: int = 16):
    """Cells of f* on ℝⁿ as (region, ∂f* builder, f* builder); None if there are too many."""
    nf = normal_form(f, n)
    per_block = []
    bl = blocks(f, n)
    for b in bl:
        if b.kind == "plN":
            return None
        per_block.append(block_cells(b))
    total = 1
    for cs in per_block:
        total *= len(cs)
    if total > limit:
        return None
    out = []
    for combo in itertools.product(*per_block):
        region = SA.translate(SA.cartesian(n, [(b.coords, c.region) for b, c in zip(bl, combo)]), nf.c)
        if all(c.subgrad is not None for c in combo):
            def sub(u, combo=combo):
                w = S.vsub(u, nf.c)
                return SA.cartesian(n, [(b.coords, c.subgrad(_local(w, b.coords))) for b, c in zip(bl, combo)])
        else:
            sub = None

        def val(u, combo=combo):
            w = S.vsub(u, nf.c)
            total = Fraction(0)
            for b, c in zip(bl, combo):
                total = S.add(total, c.value(_local(w, b.coords)))
            return total

        out.append((region, sub, val))
    return out


# --------------------------------------------------------------------------
# recession function and recession sets


def recession(f: FuncExpr, d: Sequence):
    """f_∞(d)."""
    d = tuple(S.norm(v) for v in d)
    n = len(d)
    nf = normal_form(f, n)
    total = S.vdot(nf.c, d)
    for t in nf.terms:
        k = t.kind
        if k == "const":
            continue
        if k == "abs":
            v = d[t.coords[0]]
            total = S.add(total, S.mul(t.weight, v if S.sign(v) >= 0 else S.neg(v)))
        elif k == "hinge":
            v = S.vdot(t.aff.vector(n), d)
            if S.sign(v) > 0:
                total = S.add(total, S.mul(t.weight, v))
        elif k == "exp":
            if S.sign(S.mul(t.alpha, d[t.coords[0]])) > 0:
                return POS_INF
        elif k == "neglog":
            if S.sign(S.mul(t.alpha, d[t.coords[0]])) < 0:
                return POS_INF
        elif k == "quad":
            if S.sign(d[t.coords[0]]) != 0:
                return POS_INF
        elif k == "hexp":
            i, j = t.coords
            if S.sign(d[j]) > 0:
                return POS_INF
            if S.sign(d[i]) < 0:
                total = S.add(total, S.mul(-t.weight, d[i]))
        elif k == "hyp":
            i, j = t.coords
            if S.sign(d[i]) < 0 or S.sign(d[j]) < 0:
                return POS_INF
    return total


def _recession_data(f: FuncExpr, n: int):
    """f_∞ = lin·d + Σ max(piece, piece) on the polyhedral domain given by rows/eqs."""
    nf = normal_form(f, n)
    lin = list(nf.c)
    rows, eqs, maxterms = [], [], []
    zero = zeros(n)
    for t in nf.terms:
        k = t.kind
        if k == "abs":
            e = _unit(n, t.coords[0], t.weight)
            maxterms.append((e, tuple(-v for v in e)))
        elif k == "hinge":
            maxterms.append((tuple(t.weight * a for a in t.aff.vector(n)), zero))
        elif k == "exp":
            rows.append(_unit(n, t.coords[0], t.alpha))
        elif k == "neglog":
            rows.append(_unit(n, t.coords[0], -t.alpha))
        elif k == "quad":
            eqs.append(_unit(n, t.coords[0]))
        elif k == "hexp":
            i, j = t.coords
            rows.append(_unit(n, j))
            maxterms.append((_unit(n, i, -t.weight), zero))
        elif k == "hyp":
            i, j = t.coords
            rows.append(_unit(n, i, -1))
            rows.append(_unit(n, j, -1))
    return tuple(lin), rows, eqs, maxterms


def recession_cone_fn(f: FuncExpr, n: int) -> SA.ConvexSet:
    """R_f = {d : f_∞(d) ≤ 0}."""
    lin, rows, eqs, maxterms = _recession_data(f, n)
    if 2 ** len(maxterms) > PL_EXPANSION_LIMIT:
        raise UnsupportedAtom("too many piecewise terms to expand the recession cone")
    ineqs = [(r, Fraction(0), False) for r in rows]
    for choice in itertools.product((0, 1), repeat=len(maxterms)):
        a = list(lin)
        for ch, mt in zip(choice, maxterms):
            a = [x + y for x, y in zip(a, mt[ch])]
        ineqs.append((tuple(a), Fraction(0), False))
    P = SA.Polyhedron(n, tuple(lp._dedupe(ineqs)), tuple((e, Fraction(0)) for e in eqs))
    return _simplify_poly(P)


def recession_kernel(f: FuncExpr, n: int) -> SA.ConvexSet:
    """ker f_∞ = {d : f_∞(d) = 0}.

    Inside R_f the value f_∞ ≤ 0, so the kernel is where it reaches 0.  This
    is convex when every max-term keeps one active piece on R_f, which
    covers the catalog; otherwise UnsupportedAtom.
    """
    lin, rows, eqs, maxterms = _recession_data(f, n)
    R = recession_cone_fn(f, n)
    P = SA.as_polyhedron(R)
    if SA.is_empty(P):
        return R
    boxed = SA._boxed(P.closure(), 1)
    active = list(lin)
    for a1, a2 in maxterms:
        diff = tuple(x - y for x, y in zip(a1, a2))
        hi = boxed.lp(diff, maximize=True)
        lo = boxed.lp(diff, maximize=False)
        if hi.value <= 0:
            pick = a2
        elif lo.value >= 0:
            pick = a1
        else:
            raise UnsupportedAtom("recession function is not linear on R_f; kernel may be nonconvex")
        active = [x + y for x, y in zip(active, pick)]
    K = P.with_rows(eqs=((tuple(active), Fraction(0)),)) if any(active) else P
    return _simplify_poly(K)


# --------------------------------------------------------------------------
# sublevel sets


def sublevel_set(f: FuncExpr, n: int, level) -> SA.ConvexSet:
    """{x : f(x) ≤ level} for piecewise-linear f or a single analytic term."""
    level = S.norm(level)
    nf = normal_form(f, n)
    const = sum((t.weight for t in nf.terms if t.kind == "const"), Fraction(0))
    terms = [t for t in nf.terms if t.kind != "const"]
    level = S.sub(level, const)
    if all(t.kind in ("abs", "hinge") for t in terms):
        if not isinstance(level, Fraction):
            raise UnsupportedAtom("symbolic level for a polyhedral sublevel set")
        zero = zeros(n)
        maxterms = []
        for t in terms:
            if t.kind == "abs":
                e = _unit(n, t.coords[0], t.weight)
                maxterms.append(((e, Fraction(0)), (tuple(-v for v in e), Fraction(0))))
            else:
                a = tuple(t.weight * v for v in t.aff.vector(n))
                maxterms.append(((a, t.weight * t.aff.const), (zero, Fraction(0))))
        if 2 ** len(maxterms) > PL_EXPANSION_LIMIT:
            raise UnsupportedAtom("too many kinks for the sublevel expansion")
        rows = []
        for choice in itertools.product((0, 1), repeat=len(maxterms)):
            a, b = list(nf.c), level
            for ch, mt in zip(choice, maxterms):
                pa, pb = mt[ch]
                a = [x + y for x, y in zip(a, pa)]
                b -= pb
            rows.append((tuple(a), b, False))
        return _simplify_poly(SA.Polyhedron(n, tuple(lp._dedupe(rows))))
    if len(terms) != 1 or any(nf.c):
        raise UnsupportedAtom("sublevel set of a sum with analytic terms")
    t = terms[0]
    free = [Interval.real() for _ in range(n)]
    if t.kind in ("exp", "neglog", "quad"):
        i = t.coords[0]
        w, al, be = t.weight, t.alpha, t.beta
        if t.kind == "exp":
            if S.sign(level) <= 0:
                return SA.Empty(n)
            bound = S.div(S.sub(S.log(S.div(level, w)), be), al)
            free[i] = Interval(NEG_INF, bound) if al > 0 else Interval(bound, POS_INF)
        elif t.kind == "neglog":
            bound = S.div(S.sub(S.exp(S.div(S.neg(level), w)), be), al)
            free[i] = Interval(bound, POS_INF) if al > 0 else Interval(NEG_INF, bound)
        else:
            if S.sign(level) < 0:
                return SA.Empty(n)
            r = S.sqrt(S.div(S.mul(2, level), w))
            free[i] = Interval(S.sub(be, r), S.add(be, r))
        return SA.Product(tuple(free))
    if t.kind == "hexp":
        if S.sign(level) < 0:
            return SA.Empty(n)
        i, j = t.coords
        atom = SA.ExpHypograph(n, i, j)
        shift = [Fraction(0)] * n
        shift[i] = S.neg(S.div(level, t.weight))
        return SA.translate(atom, shift)
    if t.kind == "hyp":
        if S.sign(level) < 0:
            return SA.Empty(n)
        return SA.HyperbolaSet(n, *t.coords)
    raise UnsupportedAtom(f"sublevel set for {t.kind}")


# --------------------------------------------------------------------------
# rendering helpers for piecewise descriptions


def render_recession(f: FuncExpr, n: int) -> str:
    """A short description of f_∞ as text over symbols d1..dn."""
    nf = normal_form(f, n)
    d = symbols(n, "d")
    lin = sum((sp.Rational(c.numerator, c.denominator) * di for c, di in zip(nf.c, d)), sp.Integer(0))
    parts = [S.render(lin)] if lin != 0 else []
    doms = []
    hinge_args: list = []
    abs_args: list = []
    for t in nf.terms:
        k = t.kind
        if k == "abs":
            parts.append(_weighted(t.weight, f"|d{t.coords[0] + 1}|"))
        elif k == "hinge":
            arg = sum((_sym(c * t.weight) * d[i] for i, c in t.aff.coeffs), sp.Integer(0))
            # max(a·d, 0) + max(−a·d, 0) reads better as |a·d|
            if -arg in hinge_args:
                hinge_args.remove(-arg)
                abs_args.append(-arg)
            else:
                hinge_args.append(arg)
        elif k == "exp":
            doms.append(f"{S.render(_sym(t.alpha) * d[t.coords[0]])} <= 0")
        elif k == "neglog":
            doms.append(f"{S.render(_sym(t.alpha) * d[t.coords[0]])} >= 0")
        elif k == "quad":
            doms.append(f"d{t.coords[0] + 1} = 0")
        elif k == "hexp":
            i, j = t.coords
            parts.append(_weighted(t.weight, f"max{{-d{i + 1},0}}"))
            doms.append(f"d{j + 1} <= 0")
        elif k == "hyp":
            i, j = t.coords
            doms.append(f"d{i + 1} >= 0")
            doms.append(f"d{j + 1} >= 0")
    parts += [f"|{S.render(a)}|" for a in abs_args]
    parts += [f"max{{{S.render(a)},0}}" for a in hinge_args]
    body = " + ".join(parts) if parts else "0"
    if doms:
        return f"{body} if {', '.join(doms)}; inf otherwise"
    return body


def _sym(q: Fraction):
    return sp.Rational(q.numerator, q.denominator)


def _weighted(w: Fraction, body: str) -> str:
    return body if w == 1 else f"{S.render(w)}*{body}"
