"""Diagnostics for the equality-constrained problem

    minimize f(x) subject to Ax = b.

A dual certificate is a v with Aᵀv ∈ ∂f(x⋆); such v are exactly the
members of (A▷∂f)(b) = (A∘∂f*∘Aᵀ)⁻¹(b).  For any one of them

    X = ∂f*(Aᵀv) ∩ {x : Ax = b},

which is how the solution set is built.  For m = 1 the operator
v ↦ A∂f*(Aᵀv) is a monotone graph on the line and every question is
answered on that graph; for polyhedral f and m ≥ 2 an exact LP gives x⋆
and a second LP gives the certificate.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from . import funcat as FC
from . import graph1d as G1
from . import lp
from . import scalars as S
from . import setalg as SA
from .diag1 import SET_ERRORS, _apply, _apply_T, existence_p1, kernel_flat, min_norm_member, rowspace_flat
from .ratlin import RationalMatrix, kernel_basis, pseudoinverse
from .scalars import Undecidable, is_inf
from .setalg import Interval
from .verdicts import UnsupportedProblem, Verdict, undecidable


class UnionNotFinite(Exception):
    pass


@dataclass(frozen=True)
class DualCertificate:
    v: tuple
    witness_subgradient: tuple  # Aᵀv


@dataclass(frozen=True)
class UnionMember:
    v: tuple
    subdiff_conj: SA.ConvexSet  # ∂f*(Aᵀv)


@dataclass
class P2Report:
    existence: Verdict
    range_component: tuple | None
    certificate: DualCertificate | None
    union: list
    solution_set: SA.ConvexSet
    x_star: tuple | None
    compact: Verdict
    unique: Verdict
    influence: Verdict
    exactness: Verdict
    extras: dict = field(default_factory=dict)


# --------------------------------------------------------------------------
# building blocks


def range_component(A: RationalMatrix, b: Sequence) -> tuple | None:
    """A†b when b ∈ ran A."""
    b = tuple(Fraction(v) for v in b)
    x = tuple(pseudoinverse(A).matvec(b))
    return x if tuple(A.matvec(x)) == b else None


def dual_graph(f: FC.FuncExpr, A: RationalMatrix) -> G1.Graph1D | None:
    """v ↦ A∂f*(Aᵀv) when m = 1."""
    if A.shape[0] != 1:
        return None
    try:
        return G1.line_section(f, A.row(0)).G
    except SET_ERRORS:
        return None


def _kink_lp(f: FC.FuncExpr, A: RationalMatrix, b: Sequence):
    """Epigraph LP for min f(x) s.t. Ax = b with polyhedral f."""
    m, n = A.shape
    nf = FC.normal_form(f, n)
    kinks = [t for t in nf.terms if t.kind in ("abs", "hinge")]
    nv = n + len(kinks)
    c = list(nf.c) + [t.weight for t in kinks]
    A_ub, b_ub = [], []
    for k, t in enumerate(kinks):
        row = [Fraction(0)] * nv
        row[n + k] = Fraction(-1)
        if t.kind == "abs":
            for s in (1, -1):
                r = list(row)
                r[t.coords[0]] = Fraction(s)
                A_ub.append(r)
                b_ub.append(Fraction(0))
        else:
            A_ub.append(list(row))
            b_ub.append(Fraction(0))
            r = list(row)
            for i, a in enumerate(t.aff.vector(n)):
                r[i] = a
            A_ub.append(r)
            b_ub.append(-t.aff.const)
    A_eq = [list(A.row(i)) + [Fraction(0)] * len(kinks) for i in range(m)]
    return lp.linprog(c, A_ub, b_ub, A_eq, list(b))


def _certificate_from_point(f: FC.FuncExpr, A: RationalMatrix, x) -> tuple | None:
    """Some v with Aᵀv ∈ ∂f(x), by exact LP feasibility."""
    m, _ = A.shape
    P = SA.as_polyhedron(FC.subdiff(f, x))
    if P is None:
        raise UnsupportedProblem("∂f(x⋆) has no rational H-representation")
    A_ub = [tuple(A.matvec(a)) for a, _, s in P.ineqs if not s]
    b_ub = [beta for _, beta, s in P.ineqs if not s]
    strict = [tuple(A.matvec(a)) for a, _, s in P.ineqs if s]
    b_strict = [beta for _, beta, s in P.ineqs if s]
    A_eq = [tuple(A.matvec(a)) for a, _ in P.eqs]
    b_eq = [beta for _, beta in P.eqs]
    return lp.feasible_point(m, A_ub, b_ub, A_eq, b_eq, strict, b_strict)


def _pick(V: Interval, breaks) -> object:
    """The smallest breakpoint inside V, else an endpoint, else 0."""
    inside = [t for t in breaks if V.contains(t)]
    if inside:
        return inside[0]
    if not is_inf(V.lo):
        return V.lo
    if not is_inf(V.hi):
        return V.hi
    return Fraction(0)


def certificate_search(f: FC.FuncExpr, A: RationalMatrix, b: Sequence) -> DualCertificate | None:
    m, n = A.shape
    b = tuple(Fraction(v) for v in b)
    if range_component(A, b) is None:
        return None
    G = dual_graph(f, A)
    if G is not None:
        V = G.preimage(b[0])
        if V is None:
            return None
        v = (_pick(V, G.breaks),)
    elif FC.is_polyhedral(f, n):
        res = _kink_lp(f, A, b)
        if not res.ok:
            return None
        v = _certificate_from_point(f, A, res.x[:n])
        if v is None:
            raise UnsupportedProblem("an LP minimizer without a dual certificate")
    else:
        raise Undecidable("certificate search needs m = 1 or polyhedral f")
    return DualCertificate(tuple(v), _apply_T(A, v))


def union_members(f: FC.FuncExpr, A: RationalMatrix, b: Sequence, cert: DualCertificate) -> list[UnionMember]:
    """∂f*(Aᵀv) for one v per piece of (A▷∂f)(b)."""
    G = dual_graph(f, A)
    if G is None:
        return [UnionMember(cert.v, FC.conj_subdiff(f, cert.witness_subgradient))]
    V = G.preimage(Fraction(b[0]))
    vs = [t for t in G.breaks if V.contains(t)]
    for j in range(len(G.pieces)):
        lo, hi = G.piece_ends(j)
        a = lo if S.is_inf(V.lo) or (not S.is_inf(lo) and S.le(V.lo, lo)) else V.lo
        c = hi if S.is_inf(V.hi) or (not S.is_inf(hi) and S.le(hi, V.hi)) else V.hi
        if (S.is_inf(a) or S.is_inf(c) or S.lt(a, c)) and G.pieces[j] is not None:
            vs.append(G1._between(a, c))
    if not vs:
        vs = [V.lo]
    if len(vs) > 64:
        raise UnionNotFinite("too many pieces in (A▷∂f)(b)")
    vs = G1._sort_unique(vs)
    return [UnionMember((v,), FC.conj_subdiff(f, _apply_T(A, (v,)))) for v in vs]


def solution_set_p2(f: FC.FuncExpr, A: RationalMatrix, b: Sequence, cert: DualCertificate) -> SA.ConvexSet:
    """∂f*(Aᵀv) ∩ {Ax = b} for the certificate v."""
    C = FC.conj_subdiff(f, cert.witness_subgradient)
    anchor = range_component(A, b)
    return SA.intersect_flat(C, kernel_flat(A, anchor))


def certificate_valid(f: FC.FuncExpr, A: RationalMatrix, cert: DualCertificate, x) -> bool:
    try:
        return SA.contains_point(FC.subdiff(f, x), cert.witness_subgradient)
    except FC.DomainViolation:
        return False


# --------------------------------------------------------------------------
# verdicts


def existence_p2(f: FC.FuncExpr, A: RationalMatrix, b: Sequence) -> tuple[Verdict, DualCertificate | None]:
    n = A.shape[1]
    if range_component(A, b) is None:
        return Verdict(False, "BNotInRange"), None
    try:
        viable = SA.intersect_flat(FC.range_subdiff(f, n), rowspace_flat(A))
        certs = [("ran df & ran A^T", viable)]
    except SET_ERRORS as exc:
        # only a shortcut; the certificate search below still decides
        viable = None
        certs = [("ran df & ran A^T", f"undecidable: {exc}")]
    if viable is not None and SA.is_empty(viable):
        return Verdict(False, "ViabilityFail", tuple(certs), ("dom(A▷∂f) is empty",)), None
    try:
        cert = certificate_search(f, A, b)
    except (Undecidable, UnsupportedProblem, G1.GraphError) as exc:
        return Verdict(None, "Undecidable", tuple(certs), (str(exc),)), None
    if cert is None:
        return Verdict(False, "NoCertificate", tuple(certs), ("b is outside dom(A▷∂f)",)), None
    certs.append(("dual certificate v", S.render_vec(cert.v)))
    return Verdict(True, "Yes", tuple(certs)), cert


def _shifted_kernel_meet(C: SA.ConvexSet, x_star, A: RationalMatrix) -> SA.ConvexSet:
    return SA.intersect_flat(SA.translate(C, tuple(S.neg(v) for v in x_star)), kernel_flat(A))


def _origin(X: SA.ConvexSet) -> bool:
    pt = SA.is_singleton(X)
    return pt is not None and all(S.sign(v) == 0 for v in pt)


def uniqueness_p2(f: FC.FuncExpr, A: RationalMatrix, b: Sequence, x_star, members: list[UnionMember]) -> Verdict:
    if x_star is None:
        return Verdict(False, "NoSolution")
    parts = [_shifted_kernel_meet(mbr.subdiff_conj, x_star, A) for mbr in members]
    value = all(_origin(P) for P in parts)
    certs = [(f"(df*(A^T {S.render_vec(m.v)}) - x*) & ker A", P) for m, P in zip(members, parts)]
    notes = []
    n = A.shape[1]
    if FC.is_polyhedral(f, n):
        D = SA.intersect_flat(FC.descent_cone(f, x_star), kernel_flat(A))
        certs.append(("D_f(x*) & ker A", D))
        if _origin(D) != value:
            raise UnsupportedProblem("descent-cone and union forms of uniqueness disagree")
    return Verdict(value, "SingletonOnKernel" if value else "KernelDirectionsRemain", tuple(certs), tuple(notes))


def compactness_p2(f: FC.FuncExpr, A: RationalMatrix, x_star, members: list[UnionMember]) -> Verdict:
    if x_star is None:
        return Verdict(True, "Vacuous", notes=("X is empty",))
    flat = kernel_flat(A)
    parts = [SA.intersect_flat(SA.recession_cone(m.subdiff_conj), flat) for m in members]
    value = all(SA.is_cone_origin(P) for P in parts)
    certs = [(f"rec df*(A^T {S.render_vec(m.v)}) & ker A", P) for m, P in zip(members, parts)]
    return Verdict(value, "RecessionTrivialOnKernel" if value else "RecessionMeetsKernel", tuple(certs))


def constraint_influence(f: FC.FuncExpr, A: RationalMatrix, b: Sequence, existence: Verdict, x_star=None) -> Verdict:
    """Does imposing Ax = b raise the optimal value above inf f?"""
    n = A.shape[1]
    if existence.value is not True:
        return Verdict(None, "NotApplicable", notes=("the constrained problem has no solution",))
    zero = (Fraction(0),) * n
    C0 = FC.conj_subdiff(f, zero)
    meet = SA.Empty(n) if SA.is_empty(C0) else SA.intersect_flat(C0, kernel_flat(A, range_component(A, b)))
    hits = not SA.is_empty(meet)
    certs = [("df*(0)", C0), ("b in (A df*)(0)", "yes" if hits else "no")]
    try:
        inf_f = S.neg(FC.conj_value(f, zero))
        certs.append(("inf f", inf_f))
    except SET_ERRORS:
        inf_f = None
    if x_star is not None:
        certs.append(("(A|>f)(b)", FC.eval_f(f, x_star)))
    return Verdict(hits, "NoEffect" if hits else "StrictIncrease", tuple(certs))


def exactness_check(f: FC.FuncExpr, A: RationalMatrix, b: Sequence) -> Verdict:
    """A▷f is exact at b iff b ∈ dom(A▷∂f) = ran(A∘∂f*∘Aᵀ)."""
    m, n = A.shape
    b = tuple(Fraction(v) for v in b)
    G = dual_graph(f, A)
    if G is None:
        if FC.is_polyhedral(f, n):
            # polyhedral A▷f is exact wherever it is finite
            res = _kink_lp(f, A, b)
            return Verdict(res.ok, "PolyhedralLP", (("LP status", res.status),))
        return undecidable("exactness needs m = 1 or polyhedral f")
    dom = G.range()
    exact = any(iv.contains(b[0]) for iv in dom)
    certs = [("dom(A|>df)", _render_union(dom))]
    notes = []
    try:
        H = G1.infimal_subdiff(f, A.row(0))
        p = H.resolvent(b[0])
        certs.append(("d(A|>f)", H.render("y")))
        certs.append(("b in ran(I + d(A|>f))", "no" if p is None else "yes"))
        if p is not None:
            exact_at_p = any(iv.contains(p) for iv in dom)
            certs.append(("prox_{A|>f}(b)", p))
            certs.append(("exact at prox", "yes" if exact_at_p else "no"))
            certs.append(("P1 solvable (both conditions)", "yes" if exact_at_p else "no"))
    except SET_ERRORS as exc:
        notes.append(f"∂(A▷f) not constructed: {exc}")
    return Verdict(exact, "InDomain" if exact else "OutsideDomain", tuple(certs), tuple(notes))


def _render_union(parts) -> str:
    return " u ".join(iv.render() for iv in parts) if parts else "empty"


def both_conditions_agree(f: FC.FuncExpr, A: RationalMatrix, b: Sequence) -> bool | None:
    """The two-condition test for solvability of the regularized problem, against its own existence test."""
    ex = exactness_check(f, A, b)
    try:
        predicted = ex.certificate("P1 solvable (both conditions)") == "yes"
    except KeyError:
        try:
            predicted = ex.certificate("b in ran(I + d(A|>f))") == "yes"
        except KeyError:
            return None
    actual = existence_p1(f, A, b).value
    return None if actual is None else predicted == actual


# --------------------------------------------------------------------------
# everything at once


def diagnose_p2(f: FC.FuncExpr, A: RationalMatrix, b: Sequence) -> P2Report:
    n = A.shape[1]
    b = tuple(Fraction(v) for v in b)
    xr = range_component(A, b)
    existence, cert = existence_p2(f, A, b)
    members, X, x_star = [], SA.Empty(n), None
    if cert is not None:
        members = union_members(f, A, b, cert)
        X = solution_set_p2(f, A, b, cert)
        if SA.is_empty(X):
            raise UnsupportedProblem("a certificate was found but X is empty")
        x_star = min_norm_member(X)
        if not certificate_valid(f, A, cert, x_star):
            raise UnsupportedProblem("the certificate fails Aᵀv ∈ ∂f(x⋆)")
    return P2Report(
        existence,
        xr,
        cert,
        members,
        X,
        x_star,
        compactness_p2(f, A, x_star, members),
        uniqueness_p2(f, A, b, x_star, members),
        constraint_influence(f, A, b, existence, x_star),
        exactness_check(f, A, b),
    )
