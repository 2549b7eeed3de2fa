"""Constrained problem: min f(x) s.t. Ax = b."""
import random
from fractions import Fraction

import pytest

from solnscope import diag2 as D2
from solnscope import dsl, lp
from solnscope import funcat as FC
from solnscope import scalars as S
from solnscope import setalg as SA
from solnscope.ratlin import RationalMatrix

from .conftest import CON, F, instance

EXPECTED = {
    # key: (existence reason, X, influence reason, exact at b)
    "ex1": ("NoCertificate", "empty", "NotApplicable", False),
    "ex2": ("Yes", "{0} x R", "StrictIncrease", True),
    "ex3": ("ViabilityFail", "empty", "NotApplicable", False),
    "ex4": ("NoCertificate", "empty", "NotApplicable", False),
    "ex5": ("Yes", "[1,inf) x {0}", "NoEffect", True),
}


@pytest.mark.parametrize("key", sorted(EXPECTED))
def test_table_verdicts(key):
    f, A, b = instance(CON, key)
    rep = D2.diagnose_p2(f, A, b)
    reason, X, influence, exact = EXPECTED[key]
    assert rep.existence.reason == reason
    assert SA.render(rep.solution_set) == X
    assert rep.influence.reason == influence
    assert rep.exactness.value is exact
    assert rep.unique.value is False


def test_dual_graph_domains():
    doms = {k: [iv.render() for iv in D2.dual_graph(*instance(CON, k)[:2]).range()] for k in CON}
    assert doms == {"ex1": ["(0,inf)"], "ex2": ["R"], "ex3": [], "ex4": ["(0,inf)"], "ex5": ["R"]}


def test_certificates_satisfy_the_optimality_inclusion():
    for key in ("ex2", "ex5"):
        f, A, b = instance(CON, key)
        rep = D2.diagnose_p2(f, A, b)
        assert D2.certificate_valid(f, A, rep.certificate, rep.x_star)
        for x in SA.sample_points(rep.solution_set, 10, random.Random(2)):
            assert D2.certificate_valid(f, A, rep.certificate, x)


def test_ex2_value_gap():
    f, A, b = instance(CON, "ex2")
    rep = D2.diagnose_p2(f, A, b)
    certs = dict(rep.influence.certificates)
    assert S.render(certs["(A|>f)(b)"]) == "1" and S.render(certs["inf f"]) == "0"


def test_ex5_zero_certificate():
    f, A, b = instance(CON, "ex5")
    rep = D2.diagnose_p2(f, A, b)
    assert rep.certificate.v == F(0) and rep.x_star == F(1, 0)


def test_b_outside_range_of_A():
    f = dsl.parse_function("abs(x1)")
    rep = D2.diagnose_p2(f, RationalMatrix.from_rows([[1, 0], [2, 0]]), F(1, 1))
    assert rep.existence.reason == "BNotInRange"


def test_hyperbola_indicator_instance():
    f = dsl.parse_function("hypind(x1,x2)")
    A = RationalMatrix.from_rows([[0, 1]])
    assert SA.render(D2.diagnose_p2(f, A, F(1)).solution_set) == "[1,inf) x {1}"
    assert D2.diagnose_p2(f, A, F(0)).existence.reason == "NoCertificate"


def _basis_pursuit_lp(A: RationalMatrix, b):
    # min sum t s.t. -t <= x <= t, Ax = b over (x, t)
    m, n = A.shape
    c = [Fraction(0)] * n + [Fraction(1)] * n
    A_ub, b_ub = [], []
    for i in range(n):
        e = [Fraction(0)] * (2 * n)
        e[i], e[n + i] = Fraction(1), Fraction(-1)
        A_ub.append(e)
        e = [Fraction(0)] * (2 * n)
        e[i], e[n + i] = Fraction(-1), Fraction(-1)
        A_ub.append(e)
        b_ub += [Fraction(0), Fraction(0)]
    A_eq = [list(A.row(i)) + [Fraction(0)] * n for i in range(m)]
    return lp.linprog(c, A_ub, b_ub, A_eq, list(b))


def test_basis_pursuit_optimal_value_matches_lp():
    f = dsl.parse_function("norm1()")
    rng = random.Random(9)
    for _ in range(10):
        n, m = rng.randint(2, 4), rng.randint(1, 2)
        A = RationalMatrix.from_rows([[rng.randint(-2, 2) for _ in range(n)] for _ in range(m)])
        b = tuple(Fraction(rng.randint(-2, 2)) for _ in range(m))
        rep = D2.diagnose_p2(f, A, b)
        ref = _basis_pursuit_lp(A, b)
        assert (rep.x_star is not None) == ref.ok
        if ref.ok:
            assert FC.eval_f(f, rep.x_star) == ref.value
            assert A.matvec(rep.x_star) == tuple(b)


def test_basis_pursuit_table_matrix():
    f = dsl.parse_function("norm1()")
    A = RationalMatrix.from_rows([[1, 0, 2], [0, 2, -2]])
    rep = D2.diagnose_p2(f, A, F(1, 1))
    assert rep.unique.value is False
    assert rep.x_star == F("1/2", "3/4", "1/4")


@pytest.mark.parametrize("key", sorted(CON))
def test_exactness_and_regularized_existence_agree(key):
    assert D2.both_conditions_agree(*instance(CON, key)) is not False
