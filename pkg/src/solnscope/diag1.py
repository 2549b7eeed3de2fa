"""Diagnostics for the regularized least-squares problem

    minimize f(x) + ½‖Ax − b‖².

The residual r = b − Ax⋆ is the same for every minimizer and solves
r = (I + G)⁻¹(b) with G = A∘∂f*∘Aᵀ.  Given r, the whole solution set is

    X = ∂f*(Aᵀr) ∩ {x : Ax = b − r} = x⋆ + ((∂f*(Aᵀr) − x⋆) ∩ ker A),

so existence, compactness and uniqueness all reduce to questions about the
single convex set C = ∂f*(Aᵀr) and the subspace ker A.  Each verdict is
computed on its own; none is inferred from another.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from . import funcat as FC
from . import graph1d as G1
from . import qp
from . import scalars as S
from . import setalg as SA
from .oracle import LASSO_MAX_N, lasso_enumerate
from .ratlin import RationalMatrix, Subspace, kernel_basis, pseudoinverse, rowspace_basis
from .scalars import Undecidable
from .verdicts import PreconditionFail, UnsupportedProblem, Verdict, undecidable

SET_ERRORS = (FC.FuncError, SA.SetAlgebraError, Undecidable, G1.GraphError)


@dataclass(frozen=True)
class P1Solution:
    x_star: tuple
    x_r_star: tuple
    x_k_star: tuple
    residual_r: tuple
    Ax_star: tuple


@dataclass
class P1Report:
    existence: Verdict
    solution: P1Solution | None
    solution_set: SA.ConvexSet
    compact: Verdict
    unique: Verdict
    certificates: dict = field(default_factory=dict)


# --------------------------------------------------------------------------
# small helpers


def kernel_flat(A: RationalMatrix, anchor=None) -> SA.AffineFlat:
    K = kernel_basis(A)
    return SA.AffineFlat(tuple(anchor) if anchor is not None else (Fraction(0),) * A.shape[1], K)


def rowspace_flat(A: RationalMatrix) -> SA.AffineFlat:
    return SA.AffineFlat.subspace(rowspace_basis(A))


def _apply(M: RationalMatrix, x) -> tuple:
    return tuple(S.norm(sum((S.mul(a, v) for a, v in zip(M.row(i), x)), Fraction(0))) for i in range(M.shape[0]))


def _apply_T(M: RationalMatrix, y) -> tuple:
    return tuple(S.norm(sum((S.mul(M.row(i)[j], y[i]) for i in range(M.shape[0])), Fraction(0))) for j in range(M.shape[1]))


def min_norm_member(X: SA.ConvexSet) -> tuple:
    """The point of the closed convex set X nearest the origin."""
    pt = SA.is_singleton(X)
    if pt is not None:
        return tuple(pt)
    Q = SA.as_product(X)
    if Q is not None:
        out = []
        for iv in Q.factors:
            if iv.contains(Fraction(0)):
                out.append(Fraction(0))
            elif not S.is_inf(iv.lo) and S.sign(iv.lo) > 0:
                out.append(iv.lo)
            else:
                out.append(iv.hi)
        return tuple(out)
    P = SA.as_polyhedron(X)
    if P is None:
        raise UnsupportedProblem(f"no exact nearest point for {type(X).__name__}")
    P = P.closure()
    return qp.min_norm_point(P.n, [a for a, _, _ in P.ineqs], [b for _, b, _ in P.ineqs],
                             [a for a, _ in P.eqs], [b for _, b in P.eqs])


def operator_graph(f: FC.FuncExpr, A: RationalMatrix) -> G1.Graph1D | None:
    """G(y) = A ∂f*(Aᵀy) as a graph on ℝ when m = 1; None when unavailable."""
    if A.shape[0] != 1:
        return None
    try:
        return G1.line_section(f, A.row(0)).G
    except SET_ERRORS:
        return None


# --------------------------------------------------------------------------
# particular solution


def _qp_for(f: FC.FuncExpr, A: RationalMatrix, b: Sequence) -> qp.QP:
    """Epigraph reformulation of f + ½‖Ax − b‖² for piecewise-quadratic f."""
    m, n = A.shape
    nf = FC.normal_form(f, n)
    kinks = [t for t in nf.terms if t.kind in ("abs", "hinge")]
    nv = n + len(kinks)
    Q = [[Fraction(0)] * nv for _ in range(nv)]
    q = [Fraction(0)] * nv
    for i in range(n):
        for j in range(n):
            Q[i][j] = sum((A.row(k)[i] * A.row(k)[j] for k in range(m)), Fraction(0))
        q[i] = nf.c[i] - sum((A.row(k)[i] * b[k] for k in range(m)), Fraction(0))
    for t in nf.terms:
        if t.kind == "quad":
            i = t.coords[0]
            Q[i][i] += t.weight
            q[i] -= t.weight * t.beta
    G, h = [], []
    for k, t in enumerate(kinks):
        slot = n + k
        q[slot] = t.weight
        row = [Fraction(0)] * nv
        row[slot] = Fraction(-1)
        if t.kind == "abs":
            up = list(row)
            up[t.coords[0]] = Fraction(1)
            down = list(row)
            down[t.coords[0]] = Fraction(-1)
            G += [tuple(up), tuple(down)]
            h += [Fraction(0), Fraction(0)]
        else:
            G.append(tuple(row))
            h.append(Fraction(0))
            aff = list(row)
            for i, a in enumerate(t.aff.vector(n)):
                aff[i] = a
            G.append(tuple(aff))
            h.append(-t.aff.const)
    return qp.QP(tuple(tuple(r) for r in Q), tuple(q), tuple(G), tuple(h))


def residual_p1(f: FC.FuncExpr, A: RationalMatrix, b: Sequence):
    """(route, r) with r = (I + A∘∂f*∘Aᵀ)⁻¹(b), or (route, None) when X = ∅."""
    m, n = A.shape
    b = tuple(Fraction(v) for v in b)
    w = FC.is_pure_norm1(f, n)
    if w is not None and n <= LASSO_MAX_N:
        enum = lasso_enumerate(A, b, w)
        return "sign-pattern enumeration", tuple(bi - ai for bi, ai in zip(b, enum.fitted))
    G = operator_graph(f, A)
    if G is not None:
        return "resolvent of the 1-D graph", (None if (r := G.resolvent(b[0])) is None else (r,))
    if FC.is_piecewise_quadratic(f, n):
        try:
            z = qp.solve(_qp_for(f, A, b))
        except qp.QPError:
            if SA.is_empty(SA.intersect_flat(FC.range_subdiff(f, n), rowspace_flat(A))):
                return "quadratic program", None
            raise UnsupportedProblem("the quadratic program failed on a viable instance")
        x = z[:n]
        return "quadratic program", tuple(bi - ai for bi, ai in zip(b, A.matvec(x)))
    raise UnsupportedProblem("no exact route: m ≥ 2 with analytic atoms")


def fermat_holds(f: FC.FuncExpr, A: RationalMatrix, b: Sequence, x) -> bool:
    """0 ∈ ∂f(x) + Aᵀ(Ax − b), checked exactly."""
    r = S.vsub(tuple(b), _apply(A, x))
    try:
        return SA.contains_point(FC.subdiff(f, x), _apply_T(A, r))
    except FC.DomainViolation:
        return False


def solution_from_residual(f: FC.FuncExpr, A: RationalMatrix, b: Sequence, r) -> P1Solution:
    n = A.shape[1]
    u = _apply_T(A, r)
    C = FC.conj_subdiff(f, u)
    fit = S.vsub(tuple(b), r)
    anchor = _apply(pseudoinverse(A), fit)
    X = SA.intersect_flat(C, kernel_flat(A, anchor))
    if SA.is_empty(X):
        raise UnsupportedProblem("the residual does not meet ∂f*(Aᵀr); the route is inconsistent")
    x = min_norm_member(X)
    K = kernel_basis(A)
    x_k = tuple(S.norm(v) for v in K.project(x)) if S.is_rational_vec(x) else None
    if x_k is None:
        x_r = _apply(pseudoinverse(A), _apply(A, x))
        x_k = S.vsub(x, x_r)
    else:
        x_r = S.vsub(x, x_k)
    sol = P1Solution(tuple(x), tuple(x_r), tuple(x_k), tuple(S.norm(v) for v in r), _apply(A, x))
    if not fermat_holds(f, A, b, sol.x_star):
        raise UnsupportedProblem("the candidate fails the optimality inclusion")
    return sol


def solve_p1(f: FC.FuncExpr, A: RationalMatrix, b: Sequence) -> P1Solution | None:
    """The minimum-norm minimizer, or None when there is none."""
    _, r = residual_p1(f, A, b)
    if r is None:
        return None
    return solution_from_residual(f, A, b, r)


# --------------------------------------------------------------------------
# verdicts


def existence_p1(f: FC.FuncExpr, A: RationalMatrix, b: Sequence) -> Verdict:
    m, n = A.shape
    ranA = rowspace_flat(A)
    certs = []
    try:
        viable = SA.intersect_flat(FC.range_subdiff(f, n), ranA)
        certs.append(("ran df & ran A^T", viable))
        if SA.is_empty(viable):
            return Verdict(False, "ViabilityFail", tuple(certs))
        ri = FC.relative_interior_range(f, n)
        zero_in_ri = SA.contains_point(ri, (Fraction(0),) * n)
        ri_meet = SA.intersect_flat(ri, ranA)
        certs += [("0 in ri ran df", "yes" if zero_in_ri else "no"), ("ri ran df & ran A^T", ri_meet)]
        if zero_in_ri:
            return Verdict(True, "ZeroInRiRange", tuple(certs))
        if not SA.is_empty(ri_meet):
            return Verdict(True, "RiMeetsRange", tuple(certs))
    except SET_ERRORS as exc:
        # the range shortcuts are unavailable; fall through to the graph test
        certs.append(("ran df", f"undecidable: {exc}"))
        viable = None
    G = operator_graph(f, A)
    if G is not None:
        ran = G.shift_identity().range()
        certs.append(("ran(I + A df* A^T)", _render_union(ran)))
        if len(ran) == 1 and ran[0].is_real():
            return Verdict(True, "MaximalMonotone", tuple(certs))
        if any(iv.contains(Fraction(b[0])) for iv in ran):
            return Verdict(True, "SpecificB", tuple(certs))
        return Verdict(False, "NotInRange", tuple(certs))
    if FC.is_polyhedral(f, n) and viable is not None:
        # polyhedral f*: A∂f*Aᵀ = ∂(f*∘Aᵀ) is maximal once the domains meet
        return Verdict(True, "MaximalMonotone", tuple(certs), ("polyhedral f with ran ∂f ∩ ran Aᵀ nonempty",))
    return Verdict(None, "Undecidable", tuple(certs), ("no closed form for ran(I + A∘∂f*∘Aᵀ) when m ≥ 2",))


def _render_union(parts) -> str:
    if not parts:
        return "empty"
    return " u ".join(iv.render() for iv in parts)


def solution_set_p1(sol: P1Solution, f: FC.FuncExpr, A: RationalMatrix) -> SA.ConvexSet:
    """X = x⋆ + ((∂f*(Aᵀr) − x⋆) ∩ ker A)."""
    C = FC.conj_subdiff(f, _apply_T(A, sol.residual_r))
    D = SA.intersect_flat(SA.translate(C, tuple(S.neg(v) for v in sol.x_star)), kernel_flat(A))
    return SA.translate(D, sol.x_star)


def _is_origin(X: SA.ConvexSet) -> bool:
    pt = SA.is_singleton(X)
    return pt is not None and all(S.sign(v) == 0 for v in pt)


def compactness_p1(sol: P1Solution | None, f: FC.FuncExpr, A: RationalMatrix) -> Verdict:
    if sol is None:
        return Verdict(True, "Vacuous", notes=("X is empty",))
    C = FC.conj_subdiff(f, _apply_T(A, sol.residual_r))
    K = SA.recession_cone(C)
    KA = SA.intersect_flat(K, kernel_flat(A))
    certs = [("rec df*(A^T r)", K), ("rec df*(A^T r) & ker A", KA)]
    notes = []
    try:
        P = SA.project_subspace(K, kernel_basis(A))
        certs.append(("P_kerA rec df*(A^T r)", P))
        sufficient = _is_origin(P)
        certs.append(("projection test", "holds" if sufficient else "fails"))
    except SET_ERRORS as exc:
        sufficient = None
        certs.append(("projection test", f"undecidable: {exc}"))
    value = SA.is_cone_origin(KA)
    if value and sufficient is False:
        notes.append("sufficient test inconclusive")
    return Verdict(value, "RecessionMeetsKernel" if not value else "RecessionTrivialOnKernel", tuple(certs), tuple(notes))


def uniqueness_p1(sol: P1Solution | None, f: FC.FuncExpr, A: RationalMatrix) -> Verdict:
    if sol is None:
        return Verdict(False, "NoSolution")
    C = FC.conj_subdiff(f, _apply_T(A, sol.residual_r))
    shifted = SA.translate(C, tuple(S.neg(v) for v in sol.x_star))
    D = SA.intersect_flat(shifted, kernel_flat(A))
    certs = [("(df*(A^T r) - x*) & ker A", D)]
    notes = []
    try:
        P = SA.project_subspace(shifted, kernel_basis(A))
        certs.append(("P_kerA(df*(A^T r) - x*)", P))
        sufficient = _is_origin(P)
        certs.append(("projection test", "holds" if sufficient else "fails"))
    except SET_ERRORS as exc:
        sufficient = None
        certs.append(("projection test", f"undecidable: {exc}"))
    value = _is_origin(D)
    if value and sufficient is False:
        notes.append("sufficient test inconclusive")
    return Verdict(value, "SingletonOnKernel" if value else "KernelDirectionsRemain", tuple(certs), tuple(notes))


# --------------------------------------------------------------------------
# cross-checks


@dataclass(frozen=True)
class MoreauCheck:
    holds: bool
    resolvent: tuple  # (I + G)⁻¹(b)
    inverse_resolvent: tuple  # (I + G⁻¹)⁻¹(b)
    fitted: tuple  # A x⋆
    route: str


def _dual_residual(f: FC.FuncExpr, A: RationalMatrix, b) -> tuple:
    """argmin_r ½‖r − b‖² + f*(Aᵀr) for f with f* the indicator of a polyhedron."""
    m, n = A.shape
    nf = FC.normal_form(f, n)
    if any(t.kind not in ("abs", "hinge") for t in nf.terms) or any(
        t.kind == "hinge" and t.aff.const != 0 for t in nf.terms
    ):
        raise PreconditionFail("the dual route needs a positively homogeneous polyhedral f")
    R = SA.as_polyhedron(FC.range_subdiff(f, n))
    if R is None:
        raise PreconditionFail("ran ∂f has no rational H-representation")
    R = R.closure()
    # rows a·u ≤ β with u = Aᵀr become (A a)·r ≤ β
    Gr = [tuple(A.matvec(a)) for a, _, _ in R.ineqs]
    hr = [beta for _, beta, _ in R.ineqs]
    Er = [tuple(A.matvec(a)) for a, _ in R.eqs]
    er = [beta for _, beta in R.eqs]
    ident = tuple(tuple(Fraction(int(i == j)) for j in range(m)) for i in range(m))
    return qp.solve(qp.QP(ident, tuple(-Fraction(v) for v in b), tuple(Gr), tuple(hr), tuple(Er), tuple(er)))


def moreau_check(f: FC.FuncExpr, A: RationalMatrix, b: Sequence, sol: P1Solution | None = None) -> MoreauCheck:
    """(I + G⁻¹)⁻¹(b) = b − (I + G)⁻¹(b) = Ax⋆, each side computed separately."""
    m, n = A.shape
    b = tuple(Fraction(v) for v in b)
    if sol is None:
        sol = solve_p1(f, A, b)
    if sol is None:
        raise PreconditionFail("b is outside ran(I + A∘∂f*∘Aᵀ)")
    G = operator_graph(f, A)
    if G is not None:
        r = G.resolvent(b[0])
        s = G.inverse().resolvent(b[0])
        if r is None or s is None:
            raise PreconditionFail("a resolvent is undefined at b")
        res, inv = (r,), (s,)
        route = "1-D graph and its inverse"
    else:
        res = _dual_residual(f, A, b)
        w = FC.is_pure_norm1(f, n)
        if w is not None and n <= LASSO_MAX_N:
            inv = lasso_enumerate(A, b, w).fitted
        else:
            z = qp.solve(_qp_for(f, A, b))
            inv = tuple(A.matvec(z[:n]))
        route = "dual projection and primal program"
    holds = all(S.eq(x, S.sub(bi, ri)) for x, bi, ri in zip(inv, b, res)) and all(
        S.eq(x, y) for x, y in zip(inv, sol.Ax_star)
    )
    return MoreauCheck(holds, tuple(res), tuple(inv), sol.Ax_star, route)


@dataclass(frozen=True)
class ConnectCheck:
    holds: bool
    sets: tuple  # ((name, ConvexSet), ...)


def connect_sets(sol: P1Solution, f: FC.FuncExpr, A: RationalMatrix) -> tuple:
    n = A.shape[1]
    flat = kernel_flat(A)
    C = FC.conj_subdiff(f, _apply_T(A, sol.residual_r))
    level = FC.eval_f(f, sol.x_star)
    slev = FC.sublevel_set(f, n, level)
    return (
        ("rec df*(A^T r) & ker A", SA.intersect_flat(SA.recession_cone(C), flat)),
        ("ker f_inf & ker A", SA.intersect_flat(FC.recession_kernel(f, n), flat)),
        ("R_f & ker A", SA.intersect_flat(FC.recession_cone_fn(f, n), flat)),
        ("rec slev & ker A", SA.intersect_flat(SA.recession_cone(slev), flat)),
    )


def connect_check(sol: P1Solution, f: FC.FuncExpr, A: RationalMatrix) -> ConnectCheck:
    sets = connect_sets(sol, f, A)
    first = sets[0][1]
    holds = all(SA.equal(first, X) for _, X in sets[1:])
    return ConnectCheck(holds, sets)


# --------------------------------------------------------------------------
# everything at once


def diagnose_p1(f: FC.FuncExpr, A: RationalMatrix, b: Sequence) -> P1Report:
    existence = existence_p1(f, A, b)
    sol = solve_p1(f, A, b) if existence.value is not False else None
    if existence.value is True and sol is None:
        raise UnsupportedProblem("existence certified but no minimizer was constructed")
    if sol is not None and existence.value is False:
        raise UnsupportedProblem("a minimizer was constructed where existence fails")
    X = solution_set_p1(sol, f, A) if sol is not None else SA.Empty(A.shape[1])
    return P1Report(existence, sol, X, compactness_p1(sol, f, A), uniqueness_p1(sol, f, A))
