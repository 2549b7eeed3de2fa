"""Regularized problem: min f(x) + 1/2 |Ax - b|^2."""
import random
import time
from fractions import Fraction

import pytest

from solnscope import diag1 as D1
from solnscope import dsl, oracle
from solnscope import funcat as FC
from solnscope import scalars as S
from solnscope import setalg as SA
from solnscope.ratlin import RationalMatrix, kernel_basis

from .conftest import REG, F, instance
from .test_oracle import NORM1, random_lasso

EXPECTED = {
    # key: (existence, reason, X, compact, unique)
    "ex1": (False, "ViabilityFail", "empty", "Vacuous", False),
    "ex2": (False, "ViabilityFail", "empty", "Vacuous", False),
    "ex3": (True, "MaximalMonotone", "(-inf,0] x {1}", False, False),
    "ex4": (True, "ZeroInRiRange", "[-1,1] x {1}", True, False),
    "ex5": (False, "NotInRange", "empty", "Vacuous", False),
    "ex6": (True, "MaximalMonotone", "[1,inf) x {0}", False, False),
    "lasso": (True, "ZeroInRiRange", "{(0,1/4,0)}", True, True),
}


@pytest.mark.parametrize("key", sorted(EXPECTED))
def test_table_verdicts(key):
    f, A, b = instance(REG, key)
    rep = D1.diagnose_p1(f, A, b)
    exists, reason, X, compact, unique = EXPECTED[key]
    assert rep.existence.value is exists and rep.existence.reason == reason
    assert SA.render(rep.solution_set) == X
    if compact == "Vacuous":
        assert rep.compact.vacuous
    else:
        assert rep.compact.value is compact
    assert rep.unique.value is unique


def test_lasso_exact_solution_and_certificates():
    f, A, b = instance(REG, "lasso")
    t = time.perf_counter()
    sol = D1.solve_p1(f, A, b)
    unique = D1.uniqueness_p1(sol, f, A)
    compact = D1.compactness_p1(sol, f, A)
    assert time.perf_counter() - t < 1
    assert sol.x_star == F(0, "1/4", 0)
    assert A.rmatvec(sol.residual_r) == F(1, 1, 1)
    assert SA.render(unique.certificate("(df*(A^T r) - x*) & ker A")) == "{(0,0,0)}"
    assert unique.certificate("projection test") == "fails"
    assert compact.certificate("projection test") == "fails"


def test_residual_is_unique_across_solutions():
    # every member of X shares Ax*, so r = b - Ax* is a single vector
    f, A, b = instance(REG, "ex4")
    sol = D1.solve_p1(f, A, b)
    X = D1.solution_set_p1(sol, f, A)
    for x in SA.sample_points(X, 10, random.Random(1)):
        assert tuple(b[i] - v for i, v in enumerate(A.matvec(x))) == tuple(sol.residual_r)
        assert D1.fermat_holds(f, A, b, x)


def test_min_norm_member_of_ray():
    X = SA.Product((SA.Interval(1, S.POS_INF), SA.Interval.point(0)))
    assert D1.min_norm_member(X) == F(1, 0)


def test_ex6_range_component_is_zero():
    f, A, b = instance(REG, "ex6")
    sol = D1.solve_p1(f, A, b)
    assert sol.x_r_star == F(0, 0) and sol.x_star == F(1, 0)


def test_separated_verdicts_from_identical_kernels():
    (f2, A2, b2), (f3, A3, b3) = instance(REG, "ex2"), instance(REG, "ex3")
    k2 = SA.intersect_flat(FC.recession_kernel(f2, 2), D1.kernel_flat(A2))
    k3 = SA.intersect_flat(FC.recession_kernel(f3, 2), D1.kernel_flat(A3))
    assert SA.equal(k2, k3) and not SA.is_cone_origin(k2)
    assert D1.existence_p1(f2, A2, b2).value is False
    r3 = D1.diagnose_p1(f3, A3, b3)
    assert r3.existence.value is True and r3.compact.value is False


# -- cross-checks -----------------------------------------------------------


def _connect_holds(f, A, b):
    sol = D1.solve_p1(f, A, b)
    check = D1.connect_check(sol, f, A)
    sets = [X for _, X in check.sets]
    assert len(sets) == 4
    for X in sets[1:]:
        assert SA.equal(sets[0], X), [SA.render(Y) for Y in sets]
    return check.holds


@pytest.mark.parametrize("key", ["ex3", "ex4", "ex6", "lasso"])
def test_recession_sets_agree_on_table_examples(key):
    assert _connect_holds(*instance(REG, key))


def test_recession_sets_agree_on_random_norm1_instances():
    rng = random.Random(3)
    for _ in range(20):
        A, b = random_lasso(rng, 5)
        assert _connect_holds(NORM1, A, b)


@pytest.mark.parametrize("key", ["ex3", "ex4", "ex6", "lasso"])
def test_moreau_identity_exact_on_catalog(key):
    f, A, b = instance(REG, key)
    sol = D1.solve_p1(f, A, b)
    chk = D1.moreau_check(f, A, b, sol)
    assert chk.holds
    assert tuple(b[i] - v for i, v in enumerate(chk.resolvent)) == tuple(sol.Ax_star)
    assert tuple(chk.inverse_resolvent) == tuple(sol.Ax_star)


@pytest.mark.parametrize("text,A,b", [
    ("abs(x1) + quadshift(x2,1)", [[1, 1]], [3]),
    ("hinge(x1 - 1) + hinge(-x1 - 1) + quadshift(x2,0)", [[1, 2]], [-2]),
    ("norm1()", [[1, 1, 0], [0, 1, 1]], [2, -1]),
])
def test_moreau_identity_exact_on_more_instances(text, A, b):
    f, A, b = dsl.parse_function(text), RationalMatrix.from_rows(A), F(*b)
    assert D1.moreau_check(f, A, b).holds


def test_moreau_fit_matches_proximal_gradient_on_random_lasso():
    rng = random.Random(17)
    for _ in range(50):
        A, b = random_lasso(rng)
        sol = D1.solve_p1(NORM1, A, b)
        chk = D1.moreau_check(NORM1, A, b, sol)
        assert chk.holds
        pg = oracle.prox_grad(NORM1, A, b)
        x = pg.minimizer_candidates[0]
        Ax = [sum(float(a) * v for a, v in zip(A.row(i), x)) for i in range(A.shape[0])]
        assert max(abs(p - float(q)) for p, q in zip(Ax, sol.Ax_star)) <= 1e-6


def test_uniqueness_matches_kernel_direction_probe():
    # uniqueness fails exactly when some kernel direction keeps the objective flat at x*
    rng = random.Random(23)
    for _ in range(15):
        A, b = random_lasso(rng, 4)
        sol = D1.solve_p1(NORM1, A, b)
        unique = D1.uniqueness_p1(sol, NORM1, A).value
        flat = False
        for d in kernel_basis(A).basis:
            for t in (Fraction(1, 1000), Fraction(-1, 1000)):
                y = tuple(x + t * v for x, v in zip(sol.x_star, d))
                if oracle.lasso_objective(A, b, y) == oracle.lasso_objective(A, b, sol.x_star):
                    flat = True
        if flat:
            assert not unique
