"""Acceptance criteria, one printed PASS/FAIL line each.

Expected table cells are transcribed by hand into the report's ASCII
notation (check marks become yes/no).  A handful of printed cells are
provably wrong; those are listed in ERRATA with the reason, used in place
of the printed value, and counted in the criterion line.
"""
import random
import time
from fractions import Fraction

import pytest

from solnscope import cli
from solnscope import diag1 as D1
from solnscope import diag2 as D2
from solnscope import dsl, oracle
from solnscope import funcat as FC
from solnscope import report as R
from solnscope import setalg as SA
from solnscope.ratlin import RationalMatrix, kernel_basis

from .conftest import CON, F, REG, instance
from .test_oracle import NORM1, _near, random_lasso
from .test_setalg import _random_case, _recession_by_definition

HEXP_CONJ_SUB = ("(-inf,u2) x {log(u2)} if u in {-1} x (0,inf); {(-u2/u1,log(-u2/u1))} x R if u in (-1,0) x (0,inf); "
                 "{x : x1 >= exp(x2)} if u=(0,0); empty otherwise")

P1_TABLE = {
    "ex1": {
        "existence": "no", "x_r*": "---", "X": "empty",
        "df*": "R^2 if u=(1,0); empty otherwise",
        "ran df & ran A^T": "empty", "0 in ri ran df": "no",
        "compactness": "no", "f_inf": "d1", "ker f_inf": "{0} x R", "R_f": "(-inf,0] x R",
        "ker f_inf & ker A": "{(0,0)}", "R_f & ker A": "(-inf,0] x {0}",
        "uniqueness": "no", "x* (chosen)": "---",
    },
    "ex2": {
        "existence": "no", "x_r*": "---", "X": "empty",
        "df*": "{log(u1)} x R if u in (0,inf) x {0}; empty otherwise",
        "ran df & ran A^T": "empty", "0 in ri ran df": "no",
        "compactness": "no", "ker f_inf": "(-inf,0] x R", "R_f": "(-inf,0] x R",
        "ker f_inf & ker A": "(-inf,0] x {0}", "R_f & ker A": "(-inf,0] x {0}",
        "uniqueness": "no", "x* (chosen)": "---",
    },
    "ex3": {
        "existence": "yes", "x_r*": "(0,1)", "X": "(-inf,0] x {1}",
        "df*": "(-inf,0] x R if u=(0,0); {0} x R if u in (0,1) x {0}; [0,inf) x R if u=(1,0); empty otherwise",
        "ran df & ran A^T": "{(0,0)}", "A df* A^T": "R if y=0; empty otherwise",
        "ran(I + A df* A^T)": "R", "maximality of A df* A^T": "yes",
        "ri ran df & ran A^T": "empty", "0 in ri ran df": "no",
        "compactness": "no", "f_inf": "max{d1,0}", "ker f_inf": "(-inf,0] x R", "R_f": "(-inf,0] x R",
        "ker f_inf & ker A": "(-inf,0] x {0}", "R_f & ker A": "(-inf,0] x {0}",
        "df*(A^T r)": "(-inf,0] x R", "(df*(A^T r))_inf & ker A": "(-inf,0] x {0}",
        "P_kerA((df*(A^T r))_inf)": "(-inf,0] x {0}",
        "uniqueness": "no", "x* (chosen)": "(0,1)", "slev_x* f": "(-inf,0] x R",
        "D_f(x*)": "(-inf,0] x R", "D_f(x*) & ker A": "(-inf,0] x {0}",
        "(df*(A^T r) - x_r*) & ker A": "(-inf,0] x {0}", "P_kerA(df*(A^T r))": "(-inf,0] x {0}",
    },
    "ex4": {
        "existence": "yes", "x_r*": "(0,1)", "X": "[-1,1] x {1}",
        "df*": "(-inf,-1] x R if u=(-1,0); {-1} x R if u in (-1,0) x {0}; [-1,1] x R if u=(0,0); "
               "{1} x R if u in (0,1) x {0}; [1,inf) x R if u=(1,0); empty otherwise",
        "ran df & ran A^T": "{(0,0)}", "A df* A^T": "R if y=0; empty otherwise",
        "ran(I + A df* A^T)": "R", "maximality of A df* A^T": "yes",
        "ri ran df & ran A^T": "{(0,0)}", "0 in ri ran df": "yes",
        "compactness": "yes", "f_inf": "|d1|", "ker f_inf": "{0} x R", "R_f": "{0} x R",
        "ker f_inf & ker A": "{(0,0)}", "R_f & ker A": "{(0,0)}",
        "df*(A^T r)": "[-1,1] x R", "(df*(A^T r))_inf & ker A": "{(0,0)}", "P_kerA((df*(A^T r))_inf)": "{(0,0)}",
        "uniqueness": "no", "x* (chosen)": "(0,1)", "slev_x* f": "[-1,1] x R",
        "D_f(x*)": "R^2", "D_f(x*) & ker A": "R x {0}",
        "(df*(A^T r) - x_r*) & ker A": "[-1,1] x {0}", "P_kerA(df*(A^T r))": "[-1,1] x {0}",
    },
    "ex5": {
        "existence": "no", "x_r*": "---", "X": "empty", "df*": HEXP_CONJ_SUB,
        "ran df & ran A^T": "{(0,0)}", "A df* A^T": "(0,inf) if y=0; empty otherwise",
        "ran(I + A df* A^T)": "(0,inf)", "maximality of A df* A^T": "no",
        "ri ran df & ran A^T": "empty", "0 in ri ran df": "no",
        "compactness": "no", "ker f_inf": "[0,inf) x (-inf,0]", "R_f": "[0,inf) x (-inf,0]",
        "ker f_inf & ker A": "{0} x (-inf,0]", "R_f & ker A": "{0} x (-inf,0]",
        "df*(A^T r)": "---", "(df*(A^T r))_inf": "---", "(df*(A^T r))_inf & ker A": "---",
        "P_kerA((df*(A^T r))_inf)": "---",
        "uniqueness": "no", "x* (chosen)": "---", "slev_x* f": "---", "D_f(x*)": "---", "D_f(x*) & ker A": "---",
        "(df*(A^T r) - x_r*) & ker A": "---", "P_kerA(df*(A^T r))": "---",
    },
    "ex6": {
        "existence": "yes", "x_r*": "(0,0)", "X": "[1,inf) x {0}", "df*": HEXP_CONJ_SUB,
        "ran df & ran A^T": "{(0,0)}", "A df* A^T": "R if y=0; empty otherwise",
        "ran(I + A df* A^T)": "R", "maximality of A df* A^T": "yes",
        "ri ran df & ran A^T": "empty", "0 in ri ran df": "no",
        "compactness": "yes", "ker f_inf": "[0,inf) x (-inf,0]", "R_f": "[0,inf) x (-inf,0]",
        "ker f_inf & ker A": "[0,inf) x {0}", "R_f & ker A": "[0,inf) x {0}",
        "df*(A^T r)": "{x : x1 >= exp(x2)}", "(df*(A^T r))_inf": "[0,inf) x (-inf,0]",
        "(df*(A^T r))_inf & ker A": "[0,inf) x {0}", "P_kerA((df*(A^T r))_inf)": "[0,inf) x {0}",
        "uniqueness": "no", "x* (chosen)": "(1,0)", "slev_x* f": "{x : x1 >= exp(x2)}",
        "D_f(x*)": "{x : x2 <= x1}", "D_f(x*) & ker A": "[0,inf) x {0}",
        "(df*(A^T r) - x_r*) & ker A": "[1,inf) x {0}", "P_kerA(df*(A^T r))": "(0,inf) x {0}",
    },
}

_HEXP_FIXED = ("(-inf,u2] x {log(u2)} if u in {-1} x (0,inf); {(-u2/u1,log(-u2/u1))} if u in (-1,0) x (0,inf); "
               "{x : x1 >= exp(x2)} if u=(0,0); empty otherwise")
ERRATA = {
    # X = [1,inf) x {0} is unbounded; the same table's recession row [0,inf) x {0} != {0} says "not compact"
    ("P1", "ex6", "compactness"): "no",
    # df* of a closed convex function is closed-valued, so the edge cell is (-inf,u2]; the interior
    # cell is the single point (x1 = -u2/u1 is pinned by u1 in (-1,0)), not a point times R
    ("P1", "ex5", "df*"): _HEXP_FIXED,
    ("P1", "ex6", "df*"): _HEXP_FIXED,
    # A = 1 acts on R, so the range component has one coordinate
    ("P2", "ex1", "x_r*"): "(0)",
    # C - x* = {(s,q) : s >= e^q - 1}; on q = 0 this is s >= 0.  [1,inf) x {0} is (C - x_r*) & ker A
    ("P2", "ex5", "(C - x*) & ker A"): "[0,inf) x {0}",
}

P2_TABLE = {
    "ex1": {
        "existence": "no", "x_r*": "(0,0)", "X": "empty", "A(dom f)": "(0,inf)",
        "df*": "{(-1/u1)} if u1 in (-inf,0); empty otherwise",
        "A df* A^T": "{-1/v} if v in (-inf,0); empty otherwise", "dom(A|>df)": "(0,inf)",
        "ran df & ran A^T": "(-inf,0)", "b in dom(A|>df)": "no", "exactness of A|>f at b": "no",
        "C = U df*(A^T v), v in (A|>df)(b)": "empty", "b in (A df*)(0)": "no", "(A|>f)(b) = min f": "no",
        "uniqueness": "no", "x* (chosen)": "---", "(C - x*) & ker A": "empty",
    },
    "ex2": {
        "existence": "yes", "x_r*": "(0,0)", "X": "{0} x R", "A(dom f)": "R",
        "df*": "{log(u1)} x R if u in (0,inf) x {0}; empty otherwise",
        "A df* A^T": "{log(v)} if v in (0,inf); empty otherwise", "dom(A|>df)": "R",
        "ran df & ran A^T": "(0,inf) x {0}", "b in dom(A|>df)": "yes", "exactness of A|>f at b": "yes",
        "C = U df*(A^T v), v in (A|>df)(b)": "df*(A^T 1) = {0} x R", "b in (A df*)(0)": "no",
        "(A|>f)(b) = min f": "no",
        "uniqueness": "no", "x* (chosen)": "(0,0)", "(C - x*) & ker A": "{0} x R",
    },
    "ex3": {
        "existence": "no", "x_r*": "(0,0)", "X": "empty", "A(dom f)": "R",
        "df*": "{log(u1)} x R if u in (0,inf) x {0}; empty otherwise",
        "A df* A^T": "empty", "dom(A|>df)": "empty", "ran df & ran A^T": "empty",
        "b in dom(A|>df)": "no", "exactness of A|>f at b": "no",
        "C = U df*(A^T v), v in (A|>df)(b)": "empty", "b in (A df*)(0)": "no", "(A|>f)(b) = min f": "no",
        "uniqueness": "no", "x* (chosen)": "---", "(C - x*) & ker A": "empty",
    },
    "ex4": {
        "existence": "no", "x_r*": "(0,0)", "X": "empty", "A(dom f)": "R",
        "A df* A^T": "(0,inf) if v=0; empty otherwise", "dom(A|>df)": "(0,inf)",
        "b in dom(A|>df)": "no", "exactness of A|>f at b": "no",
        "C = U df*(A^T v), v in (A|>df)(b)": "empty", "b in (A df*)(0)": "no", "(A|>f)(b) = min f": "no",
        "uniqueness": "no", "x* (chosen)": "---", "(C - x*) & ker A": "empty",
    },
    "ex5": {
        "existence": "yes", "x_r*": "(0,0)", "X": "[1,inf) x {0}", "A(dom f)": "R",
        "A df* A^T": "R if v=0; empty otherwise", "dom(A|>df)": "R",
        "b in dom(A|>df)": "yes", "exactness of A|>f at b": "yes",
        "C = U df*(A^T v), v in (A|>df)(b)": "df*(A^T 0) = {x : x1 >= exp(x2)}",
        "b in (A df*)(0)": "yes", "(A|>f)(b) = min f": "yes",
        "uniqueness": "no", "x* (chosen)": "(1,0)", "(C - x*) & ker A": "[1,inf) x {0}",
    },
}

VERDICT_ROWS = {"existence", "compactness", "uniqueness"}


def _cells(text):
    return set(text.split("; "))


def _matches(criterion, want, got):
    if criterion in VERDICT_ROWS and want == "no":
        # an empty solution set is reported as "no (X empty; vacuously ...)"
        return got == "no" or got.startswith("no (X empty")
    if criterion in ("df*", "f*"):
        return _cells(want) == _cells(got)
    return want == got


def _compare_table(tag, table, specs):
    bad, errata = [], 0
    for key, rows in table.items():
        doc = cli.run(specs[key])
        got = {r.criterion: r.value for r in doc.rows}
        for criterion, want in rows.items():
            if (tag, key, criterion) in ERRATA:
                errata += 1
                want = ERRATA[(tag, key, criterion)]
            if criterion not in got or not _matches(criterion, want, got[criterion]):
                bad.append(f"{key}/{criterion}: want {want!r}, got {got.get(criterion)!r}")
    return bad, errata


def _spec(kind, entry):
    text, A, b = entry
    return cli.ProblemSpec(kind, text, tuple(tuple(Fraction(v) for v in r) for r in A), tuple(Fraction(v) for v in b))


# --------------------------------------------------------------------------


def criterion_1():
    f, A, b = instance(REG, "lasso")
    t = time.perf_counter()
    sol = D1.solve_p1(f, A, b)
    unique = D1.uniqueness_p1(sol, f, A)
    compact = D1.compactness_p1(sol, f, A)
    elapsed = time.perf_counter() - t
    checks = {
        "x* = (0,1/4,0)": sol.x_star == F(0, "1/4", 0),
        "A^T r = (1,1,1)": A.rmatvec(sol.residual_r) == F(1, 1, 1),
        "uniqueness yes": unique.value is True,
        "(df*(A^T r) - x*) & ker A = {0}": SA.is_cone_origin(unique.certificate("(df*(A^T r) - x*) & ker A")),
        "compactness projection test fails": compact.certificate("projection test") == "fails",
        "uniqueness projection test fails": unique.certificate("projection test") == "fails",
        "runtime < 1 s": elapsed < 1,
    }
    bad = [k for k, v in checks.items() if not v]
    return not bad, f"{elapsed:.2f}s" + (f"; failed: {bad}" if bad else "")


def criterion_2():
    specs = {k: _spec("regularized", v) for k, v in REG.items()}
    t = time.perf_counter()
    bad, errata = _compare_table("P1", P1_TABLE, specs)
    elapsed = time.perf_counter() - t
    goldens = [k for k in P1_TABLE if R.render_text(cli.run(specs[k])) != cli.golden(f"reg_{k}")]
    ok = not bad and not goldens and elapsed < 5
    return ok, f"{sum(map(len, P1_TABLE.values()))} cells, {errata} errata, {elapsed:.2f}s" + (
        f"; mismatches: {bad}" if bad else "") + (f"; golden drift: {goldens}" if goldens else "")


def criterion_3():
    specs = {k: _spec("constrained", v) for k, v in CON.items()}
    t = time.perf_counter()
    bad, errata = _compare_table("P2", P2_TABLE, specs)
    influence = {k: D2.diagnose_p2(*instance(CON, k)).influence for k in ("ex2", "ex5")}
    elapsed = time.perf_counter() - t
    if influence["ex2"].reason != "StrictIncrease":
        bad.append("ex2 constraint influence")
    if not (influence["ex5"].value is True and influence["ex5"].reason == "NoEffect"):
        bad.append("ex5 constraint influence")
    goldens = [k for k in P2_TABLE if R.render_text(cli.run(specs[k])) != cli.golden(f"con_{k}")]
    ok = not bad and not goldens and elapsed < 5
    return ok, f"{sum(map(len, P2_TABLE.values()))} cells, {errata} errata, {elapsed:.2f}s" + (
        f"; mismatches: {bad}" if bad else "") + (f"; golden drift: {goldens}" if goldens else "")


def criterion_4():
    rng = random.Random(20240611)
    t = time.perf_counter()
    fails = 0
    for _ in range(200):
        C, D, p = _random_case(rng)
        flat = SA.AffineFlat.subspace(D)
        CD = SA.intersect_flat(C, flat)
        rec = SA.recession_cone(C)
        ok = SA.equal(rec, _recession_by_definition(C))
        ok &= SA.equal(SA.recession_cone(CD), SA.intersect_flat(rec, flat))
        for x0 in [p] + SA.sample_points(C, 2, rng):
            ok &= SA.equal(SA.recession_cone(SA.translate(C, [-v for v in x0])), rec)
        ok &= SA.contains(SA.project_subspace(C, D), CD)
        fails += not ok
    elapsed = time.perf_counter() - t
    return fails == 0 and elapsed < 60, f"200 cases, {fails} failures, {elapsed:.1f}s"


def criterion_5():
    cases = [instance(REG, k) for k in ("ex3", "ex4", "ex6", "lasso")]
    rng = random.Random(3)
    cases += [(NORM1, *random_lasso(rng, 5)) for _ in range(20)]
    fails = 0
    for f, A, b in cases:
        sol = D1.solve_p1(f, A, b)
        sets = [X for _, X in D1.connect_check(sol, f, A).sets]
        fails += not all(SA.equal(sets[0], X) for X in sets[1:])
    return fails == 0, f"{len(cases)} instances, {fails} with unequal sets"


def criterion_6():
    catalog = [instance(REG, k) for k in ("ex3", "ex4", "ex6", "lasso")]
    catalog += [(dsl.parse_function(t), RationalMatrix.from_rows(A), F(*b)) for t, A, b in (
        ("abs(x1) + quadshift(x2,1)", [[1, 1]], [3]),
        ("hinge(x1 - 1) + hinge(-x1 - 1) + quadshift(x2,0)", [[1, 2]], [-2]),
        ("norm1()", [[1, 1, 0], [0, 1, 1]], [2, -1]),
    )]
    exact_fail = sum(not D1.moreau_check(f, A, b).holds for f, A, b in catalog)
    rng = random.Random(17)
    worst = 0.0
    for _ in range(50):
        A, b = random_lasso(rng)
        sol = D1.solve_p1(NORM1, A, b)
        x = oracle.prox_grad(NORM1, A, b).minimizer_candidates[0]
        Ax = [sum(float(a) * v for a, v in zip(A.row(i), x)) for i in range(A.shape[0])]
        worst = max(worst, max(abs(p - float(q)) for p, q in zip(Ax, sol.Ax_star)))
    return exact_fail == 0 and worst <= 1e-6, (
        f"{len(catalog)} exact instances, {exact_fail} failures; 50 random lasso, max |Ax diff| = {worst:.1e}")


def criterion_7():
    rng = random.Random(11)
    gap = 0.0
    for _ in range(50):
        A, b = random_lasso(rng)
        gap = max(gap, abs(oracle.prox_grad(NORM1, A, b).objective_value - float(oracle.lasso_enumerate(A, b).objective)))
    problems = []
    for key in ("ex4",):  # the bounded-X table instance
        f, A, b = instance(REG, key)
        X = D1.diagnose_p1(f, A, b).solution_set
        res = oracle.grid_minimize(oracle.float_objective(f, A, b), oracle.GridSpec(((-3.0, 3.0),) * 2),
                                   kernel=kernel_basis(A).basis)
        if not res.minimizer_candidates or not all(_near(X, c, 2 * max(res.pitch)) for c in res.minimizer_candidates):
            problems.append(key)
    for key, flag in (("ex2", "diverges-along-kernel"), ("ex3", "boundary"), ("ex5", "diverges-along-kernel"),
                      ("ex6", "boundary")):
        f, A, b = instance(REG, key)
        X = D1.diagnose_p1(f, A, b).solution_set
        res = oracle.grid_minimize(oracle.float_objective(f, A, b), oracle.GridSpec(((-3.0, 3.0),) * 2),
                                   kernel=kernel_basis(A).basis)
        spurious = any(not _near(X, c, 2 * max(res.pitch)) for c in res.minimizer_candidates) if not SA.is_empty(X) \
            else bool(res.minimizer_candidates)
        if flag not in res.flags or spurious:
            problems.append(key)
    return gap <= 1e-8 and not problems, f"max objective gap {gap:.1e}; grid problems: {problems or 'none'}"


def criterion_8():
    (f2, A2, b2), (f3, A3, b3) = instance(REG, "ex2"), instance(REG, "ex3")
    k2 = SA.intersect_flat(FC.recession_kernel(f2, 2), D1.kernel_flat(A2))
    k3 = SA.intersect_flat(FC.recession_kernel(f3, 2), D1.kernel_flat(A3))
    r2, r3 = D1.diagnose_p1(f2, A2, b2), D1.diagnose_p1(f3, A3, b3)
    ok = SA.equal(k2, k3) and not SA.is_cone_origin(k2)
    ok &= r2.existence.value is False and r3.existence.value is True and r3.compact.value is False
    return ok, f"ker f_inf & ker A = {SA.render(k2)} for both; existence {r2.existence.value}/{r3.existence.value}"


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6, criterion_7, criterion_8]


@pytest.mark.parametrize("check", CRITERIA, ids=[c.__name__ for c in CRITERIA])
def test_criterion(check, capsys):
    ok, detail = check()
    with capsys.disabled():
        print(f"\n{check.__name__.replace('_', ' ')}: {'PASS' if ok else 'FAIL'} ({detail})")
    assert ok, detail
