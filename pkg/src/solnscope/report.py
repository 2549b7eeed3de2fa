"""Turn diagnostics into ordered (criterion, value) rows.

Rows mirror the evaluation tables: verdicts first in each section, then the
sets that certify them.  Every row belongs to one section (existence,
compactness, uniqueness, checks) so ``--checks`` can select sections.
Values are plain ASCII; sets use the interval notation of ``setalg.render``.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction

from . import diag1 as D1
from . import diag2 as D2
from . import funcat as FC
from . import graph1d as G1
from . import oracle
from . import scalars as S
from . import setalg as SA
from .ratlin import RationalMatrix, kernel_basis
from .verdicts import PreconditionFail, UnsupportedProblem, Verdict

SECTIONS = ("existence", "compactness", "uniqueness", "checks")
NONE = "---"
ERRORS = D1.SET_ERRORS + (UnsupportedProblem, PreconditionFail, oracle.OracleError)


@dataclass(frozen=True)
class Row:
    section: str
    criterion: str
    value: str
    verdict: str | None = None  # key into ReportDocument.verdicts


@dataclass
class ReportDocument:
    kind: str
    function: str
    A: list
    b: list
    rows: list = field(default_factory=list)
    verdicts: dict = field(default_factory=dict)

    @property
    def undecidable(self) -> bool:
        return any(v["value"] is None for v in self.verdicts.values()) or any(
            r.value.startswith("undecidable") for r in self.rows
        )


# --------------------------------------------------------------------------
# value formatting


def fmt(x) -> str:
    if x is None:
        return NONE
    if isinstance(x, str):
        return x
    if isinstance(x, SA.ConvexSet):
        return SA.render(x)
    if isinstance(x, (tuple, list)):
        return S.render_vec(tuple(x))
    return S.render(x)


def yes_no(flag) -> str:
    return {True: "yes", False: "no", None: "undecidable"}[flag]


def verdict_text(v: Verdict, what: str) -> str:
    if v.vacuous:
        return f"no (X empty; vacuously {what})"
    if v.value is None:
        return "undecidable: " + "; ".join(v.notes) if v.notes else "undecidable"
    return yes_no(v.value)


def verdict_json(v: Verdict) -> dict:
    return {
        "value": v.value,
        "reason": v.reason,
        "vacuous": v.vacuous,
        "certificates": {k: fmt(c) for k, c in v.certificates},
        "notes": list(v.notes),
    }


def _safe(fn, *args):
    try:
        return fmt(fn(*args))
    except ERRORS as exc:
        return f"undecidable: {exc}"


def _where(var: str, region: SA.ConvexSet) -> str:
    pt = SA.is_singleton(region)
    if pt is not None:
        return f"{var}={S.render_vec(pt) if len(pt) > 1 else S.render(pt[0])}"
    return f"{var} in {SA.render(region)}"


def conjugate_rows(f: FC.FuncExpr, n: int) -> tuple[str, str]:
    """(f*, ∂f*) as piecewise text over u1..un."""
    cells = FC.global_cells(f, n)
    if cells is None:
        return "not tabulated (more than 16 cells)", "not tabulated (more than 16 cells)"
    u = FC.symbols(n)
    vals, subs = [], []
    for region, sub, val in cells:
        pt = SA.is_singleton(region)
        arg = pt if pt is not None else u
        var = "u" if n > 1 else "u1"
        vals.append(f"{S.render(val(arg))} if {_where(var, region)}")
        if sub is not None:
            subs.append(f"{SA.render(sub(arg))} if {_where(var, region)}")
    conj = "; ".join(vals) + "; inf otherwise"
    sub_text = "; ".join(subs) + "; empty otherwise" if subs else "empty"
    return conj, sub_text


def _union(parts) -> str:
    return " u ".join(iv.render() for iv in parts) if parts else "empty"


def _matrix_text(A: RationalMatrix) -> list:
    return [[S.render(v) for v in A.row(i)] for i in range(A.shape[0])]


# --------------------------------------------------------------------------
# regularized problem


def p1_document(f: FC.FuncExpr, text: str, A: RationalMatrix, b, seed: int = 0, oracle_verify: bool = False) -> ReportDocument:
    m, n = A.shape
    doc = ReportDocument("regularized", text, _matrix_text(A), [S.render(v) for v in b])
    rows = doc.rows
    try:
        rep = D1.diagnose_p1(f, A, b)
    except ERRORS as exc:
        doc.verdicts["existence"] = verdict_json(Verdict(None, "Undecidable", notes=(str(exc),)))
        rows.append(Row("existence", "existence", f"undecidable: {exc}", "existence"))
        return doc
    sol = rep.solution
    for key, v in (("existence", rep.existence), ("compactness", rep.compact), ("uniqueness", rep.unique)):
        doc.verdicts[key] = verdict_json(v)
    flat = D1.kernel_flat(A)
    G = D1.operator_graph(f, A)

    def add(section, criterion, value, verdict=None):
        rows.append(Row(section, criterion, value, verdict))

    # existence
    add("existence", "existence", verdict_text(rep.existence, "existent"), "existence")
    add("existence", "existence reason", rep.existence.reason)
    add("existence", "x_r*", fmt(sol.x_r_star) if sol else NONE)
    add("existence", "X", fmt(rep.solution_set))
    conj, conj_sub = conjugate_rows(f, n)
    add("existence", "f*", conj)
    add("existence", "df(x*)", _safe(FC.subdiff, f, sol.x_star) if sol else NONE)
    add("existence", "df*", conj_sub)
    add("existence", "ran df & ran A^T", _safe(lambda: SA.intersect_flat(FC.range_subdiff(f, n), D1.rowspace_flat(A))))
    if G is not None:
        add("existence", "A df* A^T", G.render("y"))
        ran = G.shift_identity().range()
        add("existence", "ran(I + A df* A^T)", _union(ran))
        add("existence", "maximality of A df* A^T", yes_no(len(ran) == 1 and ran[0].is_real()))
    else:
        add("existence", "A df* A^T", "not evaluated (m > 1)")
        add("existence", "ran(I + A df* A^T)", "R^%d" % m if rep.existence.reason == "MaximalMonotone" else "not evaluated (m > 1)")
        add("existence", "maximality of A df* A^T", "yes" if rep.existence.reason == "MaximalMonotone" else "not evaluated (m > 1)")
    add("existence", "ri ran df & ran A^T", _safe(lambda: SA.intersect_flat(FC.relative_interior_range(f, n), D1.rowspace_flat(A))))
    add("existence", "0 in ri ran df", _safe(lambda: yes_no(SA.contains_point(FC.relative_interior_range(f, n), (Fraction(0),) * n))))

    # compactness
    add("compactness", "compactness", verdict_text(rep.compact, "compact"), "compactness")
    add("compactness", "f_inf", _safe(FC.render_recession, f, n))
    add("compactness", "ker f_inf", _safe(FC.recession_kernel, f, n))
    add("compactness", "R_f", _safe(FC.recession_cone_fn, f, n))
    add("compactness", "ker f_inf & ker A", _safe(lambda: SA.intersect_flat(FC.recession_kernel(f, n), flat)))
    add("compactness", "R_f & ker A", _safe(lambda: SA.intersect_flat(FC.recession_cone_fn(f, n), flat)))
    C = FC.conj_subdiff(f, D1._apply_T(A, sol.residual_r)) if sol else None
    if sol:
        certs = dict(rep.compact.certificates)
        add("compactness", "df*(A^T r)", fmt(C))
        add("compactness", "(df*(A^T r))_inf", fmt(certs["rec df*(A^T r)"]))
        add("compactness", "(df*(A^T r))_inf & ker A", fmt(certs["rec df*(A^T r) & ker A"]))
        add("compactness", "P_kerA((df*(A^T r))_inf)", fmt(certs.get("P_kerA rec df*(A^T r)")))
        add("compactness", "projection test (sufficient)", _sufficient_text(rep.compact))
    else:
        for name in ("df*(A^T r)", "(df*(A^T r))_inf", "(df*(A^T r))_inf & ker A", "P_kerA((df*(A^T r))_inf)",
                     "projection test (sufficient)"):
            add("compactness", name, NONE)

    # uniqueness
    add("uniqueness", "uniqueness", verdict_text(rep.unique, "unique"), "uniqueness")
    if sol:
        certs = dict(rep.unique.certificates)
        level = FC.eval_f(f, sol.x_star)
        add("uniqueness", "x* (chosen)", fmt(sol.x_star))
        add("uniqueness", "slev_x* f", _safe(FC.sublevel_set, f, n, level))
        add("uniqueness", "(slev_x* f)_inf", _safe(lambda: SA.recession_cone(FC.sublevel_set(f, n, level))))
        add("uniqueness", "D_f(x*)", _safe(FC.descent_cone, f, sol.x_star))
        add("uniqueness", "D_f(x*) & ker A", _safe(lambda: SA.intersect_flat(FC.descent_cone(f, sol.x_star), flat)))
        add("uniqueness", "(df*(A^T r) - x_r*) & ker A",
            _safe(lambda: SA.intersect_flat(SA.translate(C, tuple(S.neg(v) for v in sol.x_r_star)), flat)))
        add("uniqueness", "(df*(A^T r) - x*) & ker A", fmt(certs["(df*(A^T r) - x*) & ker A"]))
        add("uniqueness", "P_kerA(df*(A^T r))", _safe(SA.project_subspace, C, kernel_basis(A)))
        add("uniqueness", "P_kerA(df*(A^T r) - x*)", fmt(certs.get("P_kerA(df*(A^T r) - x*)")))
        add("uniqueness", "projection test (sufficient)", _sufficient_text(rep.unique))
    else:
        for name in ("x* (chosen)", "slev_x* f", "(slev_x* f)_inf", "D_f(x*)", "D_f(x*) & ker A",
                     "(df*(A^T r) - x_r*) & ker A", "(df*(A^T r) - x*) & ker A", "P_kerA(df*(A^T r))",
                     "P_kerA(df*(A^T r) - x*)", "projection test (sufficient)"):
            add("uniqueness", name, NONE)

    # cross-checks
    if sol:
        add("checks", "r", fmt(sol.residual_r))
        add("checks", "A^T r", fmt(D1._apply_T(A, sol.residual_r)))
        add("checks", "Ax*", fmt(sol.Ax_star))
        add("checks", "optimality inclusion at x*", yes_no(D1.fermat_holds(f, A, b, sol.x_star)))
        add("checks", "recession sets agree on ker A", _safe(lambda: yes_no(D1.connect_check(sol, f, A).holds)))
        add("checks", "b - (I + G)^-1(b) = Ax* = (I + G^-1)^-1(b)", _safe(lambda: yes_no(D1.moreau_check(f, A, b, sol).holds)))
        add("checks", f"sampled members of X optimal (seed {seed})", _safe(_p1_samples, f, A, b, sol, rep.solution_set, seed))
    else:
        add("checks", "r", NONE)
    if oracle_verify:
        for name, value in _p1_oracle_rows(f, A, b, sol, rep.solution_set):
            add("checks", name, value)
    return doc


def _sufficient_text(v: Verdict) -> str:
    try:
        text = v.certificate("projection test")
    except KeyError:
        return NONE
    if text == "fails" and v.value:
        return "fails (multi-valued; sufficient test inconclusive)"
    return text


def _p1_objective(f, A, b, x):
    val = FC.eval_f(f, x)
    res = S.vsub(tuple(b), D1._apply(A, x))
    return S.add(val, S.mul(Fraction(1, 2), S.vdot(res, res)))


def _p1_samples(f, A, b, sol, X, seed) -> str:
    rng = random.Random(seed)
    target = _p1_objective(f, A, b, sol.x_star)
    pts = SA.sample_points(X, 50, rng)
    bad = [p for p in pts if not S.eq(_p1_objective(f, A, b, p), target)]
    return f"{yes_no(not bad)} ({len(pts)} samples)"


def _grid_box(X: SA.ConvexSet, n: int):
    box = []
    for i in range(n):
        iv = SA.image_1d(X, SA._unit(n, i)) if not SA.is_empty(X) else None
        lo = -3.0 if iv is None or S.is_inf(iv.lo) else S.to_float(iv.lo) - 2.0
        hi = 3.0 if iv is None or S.is_inf(iv.hi) else S.to_float(iv.hi) + 2.0
        box.append((min(lo, -3.0), max(hi, 3.0)))
    return tuple(box)


def _p1_oracle_rows(f, A, b, sol, X):
    m, n = A.shape
    out = []
    if n <= 2:
        spec = oracle.GridSpec(_grid_box(X, n))
        obj = oracle.float_objective(f, A, b)
        try:
            res = oracle.grid_minimize(obj, spec, kernel=tuple(kernel_basis(A).basis))
        except oracle.OracleError as exc:
            return [("grid oracle", f"undecidable: {exc}")]
        flags = ",".join(sorted(res.flags)) or "none"
        out.append(("grid oracle flags", flags))
        if sol is None:
            out.append(("grid oracle agrees", yes_no(res.diverges or not res.minimizer_candidates)))
        elif res.boundary:
            out.append(("grid oracle agrees", yes_no(not res.diverges and not SA.is_bounded(X))))
        else:
            tol = 2 * max(res.pitch)
            ok = all(_near(X, c, tol) for c in res.minimizer_candidates)
            out.append(("grid oracle agrees", yes_no(ok)))
    try:
        pg = oracle.prox_grad(f, A, b)
        if sol is not None:
            fit = [S.to_float(v) for v in sol.Ax_star]
            Ax = [sum(float(a) * x for a, x in zip(A.row(i), pg.minimizer_candidates[0])) for i in range(m)]
            gap = max(abs(p - q) for p, q in zip(fit, Ax)) if m else 0.0
            out.append(("proximal gradient Ax agrees (1e-6)", yes_no(gap <= 1e-6)))
    except oracle.NoProx:
        out.append(("proximal gradient", "not applicable"))
    return out


def _near(X: SA.ConvexSet, c, tol: float) -> bool:
    """Some rational point within tol (sup norm) of c lies in X."""
    n = len(c)
    P = SA.as_polyhedron(X)
    if P is not None:
        rows = []
        for i in range(n):
            e = SA._unit(n, i)
            hi = Fraction(c[i]).limit_denominator(10**4) + Fraction(tol).limit_denominator(10**4)
            lo = Fraction(c[i]).limit_denominator(10**4) - Fraction(tol).limit_denominator(10**4)
            rows += [(e, hi, False), (tuple(-v for v in e), -lo, False)]
        return not SA.is_empty(P.closure().with_rows(ineqs=rows))
    Q = SA.as_product(X)
    if Q is None:
        return False
    return all(iv.closure().intersect(SA.Interval(c[i] - tol, c[i] + tol)).is_empty() is False for i, iv in enumerate(Q.factors))


# --------------------------------------------------------------------------
# constrained problem


def p2_document(f: FC.FuncExpr, text: str, A: RationalMatrix, b, seed: int = 0, oracle_verify: bool = False) -> ReportDocument:
    m, n = A.shape
    doc = ReportDocument("constrained", text, _matrix_text(A), [S.render(v) for v in b])
    rows = doc.rows
    try:
        rep = D2.diagnose_p2(f, A, b)
    except ERRORS as exc:
        doc.verdicts["existence"] = verdict_json(Verdict(None, "Undecidable", notes=(str(exc),)))
        rows.append(Row("existence", "existence", f"undecidable: {exc}", "existence"))
        return doc
    for key, v in (("existence", rep.existence), ("compactness", rep.compact), ("uniqueness", rep.unique),
                   ("constraint influence", rep.influence), ("exactness", rep.exactness)):
        doc.verdicts[key] = verdict_json(v)
    G = D2.dual_graph(f, A)
    flat = D1.kernel_flat(A)

    def add(section, criterion, value, verdict=None):
        rows.append(Row(section, criterion, value, verdict))

    reason = {
        "BNotInRange": "b not in ran A",
        "ViabilityFail": "dom(A|>df) = empty",
        "NoCertificate": "b not in dom(A|>df)",
        "Yes": "dual certificate found",
    }.get(rep.existence.reason, rep.existence.reason)
    add("existence", "existence", verdict_text(rep.existence, "existent"), "existence")
    add("existence", "existence reason", reason)
    add("existence", "x_r*", fmt(rep.range_component))
    add("existence", "X", fmt(rep.solution_set))
    if m == 1:
        add("existence", "A(dom f)", _safe(lambda: _interval(SA.image_1d(FC.domain(f, n), A.row(0)))))
    else:
        add("existence", "A(dom f)", "not evaluated (m > 1)")
    conj, conj_sub = conjugate_rows(f, n)
    add("existence", "f*", conj)
    add("existence", "df*", conj_sub)
    if G is not None:
        add("existence", "A df* A^T", G.render("v"))
        add("existence", "dom(A|>df)", _union(G.range()))
        add("existence", "b in dom(A|>df)", yes_no(any(iv.contains(Fraction(b[0])) for iv in G.range())))
    else:
        add("existence", "A df* A^T", "not evaluated (m > 1)")
        add("existence", "dom(A|>df)", "not evaluated (m > 1)")
        add("existence", "b in dom(A|>df)", yes_no(rep.certificate is not None))
    add("existence", "ran df & ran A^T", _safe(lambda: SA.intersect_flat(FC.range_subdiff(f, n), D1.rowspace_flat(A))))
    add("existence", "exactness of A|>f at b", verdict_text(rep.exactness, "exact"), "exactness")
    add("existence", "C = U df*(A^T v), v in (A|>df)(b)", _members_text(rep.union))
    add("existence", "dual certificate v", fmt(rep.certificate.v) if rep.certificate else NONE)
    infl = dict(rep.influence.certificates)
    add("existence", "b in (A df*)(0)", infl.get("b in (A df*)(0)", "no"))
    add("existence", "(A|>f)(b) = min f", yes_no(rep.influence.value is True), "constraint influence")
    add("existence", "constraint influence", rep.influence.reason)

    add("compactness", "compactness", verdict_text(rep.compact, "compact"), "compactness")
    if rep.x_star is not None:
        parts = [SA.intersect_flat(SA.recession_cone(mb.subdiff_conj), flat) for mb in rep.union]
        add("compactness", "(C)_inf & ker A", " u ".join(fmt(P) for P in parts))
    else:
        add("compactness", "(C)_inf & ker A", NONE)

    add("uniqueness", "uniqueness", verdict_text(rep.unique, "unique"), "uniqueness")
    add("uniqueness", "x* (chosen)", fmt(rep.x_star))
    if rep.x_star is not None:
        parts = [D2._shifted_kernel_meet(mb.subdiff_conj, rep.x_star, A) for mb in rep.union]
        add("uniqueness", "(C - x*) & ker A", " u ".join(fmt(P) for P in parts))
        add("uniqueness", "D_f(x*) & ker A", _safe(lambda: SA.intersect_flat(FC.descent_cone(f, rep.x_star), flat)))
    else:
        add("uniqueness", "(C - x*) & ker A", "empty")
        add("uniqueness", "D_f(x*) & ker A", NONE)

    ex = dict(rep.exactness.certificates)
    add("checks", "d(A|>f)", fmt(ex.get("d(A|>f)")))
    add("checks", "b in ran(I + d(A|>f))", fmt(ex.get("b in ran(I + d(A|>f))")))
    add("checks", "prox_{A|>f}(b)", fmt(ex.get("prox_{A|>f}(b)")))
    add("checks", "exact at prox_{A|>f}(b)", fmt(ex.get("exact at prox")))
    add("checks", "regularized problem solvable (both conditions)", fmt(ex.get("P1 solvable (both conditions)")))
    add("checks", "agrees with regularized existence test", _safe(lambda: yes_no(D2.both_conditions_agree(f, A, b))))
    if rep.x_star is not None:
        add("checks", "certificate A^T v in df(x*)", yes_no(D2.certificate_valid(f, A, rep.certificate, rep.x_star)))
        add("checks", f"sampled members of X feasible and optimal (seed {seed})",
            _safe(_p2_samples, f, A, b, rep.x_star, rep.solution_set, seed))
    if oracle_verify:
        add("checks", "oracle", "not applicable to the constrained problem")
    return doc


def _interval(iv) -> str:
    return "empty" if iv is None else iv.render()


def _members_text(members) -> str:
    if not members:
        return "empty"
    return " u ".join(f"df*(A^T {fmt(mb.v) if len(mb.v) > 1 else S.render(mb.v[0])}) = {fmt(mb.subdiff_conj)}" for mb in members)


def _p2_samples(f, A, b, x_star, X, seed) -> str:
    rng = random.Random(seed)
    target = FC.eval_f(f, x_star)
    pts = SA.sample_points(X, 50, rng)
    bad = [p for p in pts if tuple(D1._apply(A, p)) != tuple(Fraction(v) for v in b) or not S.eq(FC.eval_f(f, p), target)]
    return f"{yes_no(not bad)} ({len(pts)} samples)"


# --------------------------------------------------------------------------
# output


def select(doc: ReportDocument, sections) -> ReportDocument:
    keep = [r for r in doc.rows if r.section in sections]
    verdicts = {k: v for k, v in doc.verdicts.items() if any(r.verdict == k for r in keep)}
    return ReportDocument(doc.kind, doc.function, doc.A, doc.b, keep, verdicts)


def render_text(doc: ReportDocument) -> str:
    width = max((len(r.criterion) for r in doc.rows), default=0)
    lines = [
        f"kind: {doc.kind}",
        f"function: {doc.function}",
        "A: [" + ",".join("[" + ",".join(r) + "]" for r in doc.A) + "]",
        "b: [" + ",".join(doc.b) + "]",
    ]
    section = None
    for r in doc.rows:
        if r.section != section:
            section = r.section
            lines += ["", f"== {section} =="]
        lines.append(f"{r.criterion.ljust(width)} | {r.value}")
    return "\n".join(lines) + "\n"


def to_json(doc: ReportDocument) -> dict:
    return {
        "kind": doc.kind,
        "function": doc.function,
        "A": doc.A,
        "b": doc.b,
        "rows": [
            {"section": r.section, "criterion": r.criterion, "value": r.value}
            | ({"certificate": r.verdict} if r.verdict else {})
            for r in doc.rows
        ],
        "verdicts": doc.verdicts,
    }
