"""Numerical oracles against the exact routes."""
import random
from fractions import Fraction

import numpy as np
import pytest

from solnscope import diag1 as D1
from solnscope import dsl, oracle
from solnscope import scalars as S
from solnscope import setalg as SA
from solnscope.ratlin import RationalMatrix, kernel_basis

from .conftest import F, instance, REG

NORM1 = dsl.parse_function("norm1()")


def random_lasso(rng: random.Random, max_n: int = 5):
    n = rng.randint(2, max_n)
    m = rng.randint(1, 3)
    A = RationalMatrix.from_rows([[rng.randint(-3, 3) for _ in range(n)] for _ in range(m)])
    b = tuple(Fraction(rng.randint(-4, 4)) for _ in range(m))
    return A, b


def test_lasso_enumeration_on_table_example():
    A = RationalMatrix.from_rows([[1, 0, 2], [0, 2, -2]])
    res = oracle.lasso_enumerate(A, F(1, 1))
    assert res.solutions == (F(0, "1/4", 0),)
    assert res.fitted == F(0, "1/2")
    # objective worked by hand: 1/4 + (1 + 1/4)/2
    assert res.objective == Fraction(7, 8)


def test_lasso_enumeration_agrees_with_proximal_gradient():
    rng = random.Random(11)
    for _ in range(50):
        A, b = random_lasso(rng)
        exact = oracle.lasso_enumerate(A, b)
        pg = oracle.prox_grad(NORM1, A, b)
        assert abs(pg.objective_value - float(exact.objective)) <= 1e-8


def test_every_enumerated_vertex_attains_the_optimum():
    rng = random.Random(5)
    for _ in range(20):
        A, b = random_lasso(rng, 4)
        res = oracle.lasso_enumerate(A, b)
        for x in res.solutions:
            assert oracle.lasso_objective(A, b, x) == res.objective
            assert A.matvec(x) == res.fitted


def _near(X, c, tol):
    box = SA.box([Fraction(v - tol).limit_denominator(10**6) for v in c],
                 [Fraction(v + tol).limit_denominator(10**6) for v in c])
    return not SA.is_empty(SA.intersect(X, box))


@pytest.mark.parametrize("key", ["ex4", "lasso"])
def test_grid_candidates_near_bounded_solution_sets(key):
    f, A, b = instance(REG, key)
    n = A.shape[1]
    rep = D1.diagnose_p1(f, A, b)
    assert SA.is_bounded(rep.solution_set)
    spec = oracle.GridSpec(((-3.0, 3.0),) * n, resolution=121 if n <= 2 else 41)
    res = oracle.grid_minimize(oracle.float_objective(f, A, b), spec, kernel=kernel_basis(A).basis)
    assert res.minimizer_candidates and not res.diverges
    for c in res.minimizer_candidates:
        assert _near(rep.solution_set, c, 2 * max(res.pitch))


@pytest.mark.parametrize("key,flags", [
    ("ex2", {"diverges-along-kernel"}),
    ("ex3", {"boundary"}),
    ("ex5", {"diverges-along-kernel"}),
    ("ex6", {"boundary"}),
])
def test_grid_flags_unbounded_and_empty_instances(key, flags):
    f, A, b = instance(REG, key)
    spec = oracle.GridSpec(((-3.0, 3.0),) * 2)
    res = oracle.grid_minimize(oracle.float_objective(f, A, b), spec, kernel=kernel_basis(A).basis)
    assert flags <= res.flags
    rep = D1.diagnose_p1(f, A, b)
    if SA.is_empty(rep.solution_set):
        assert res.diverges and not res.minimizer_candidates
    else:
        # candidates (if any) hug the box and still lie near X
        assert not res.diverges
        for c in res.minimizer_candidates:
            assert _near(rep.solution_set, c, 2 * max(res.pitch))


def test_grid_rejects_oversized_grid():
    with pytest.raises(ValueError):
        oracle.GridSpec(((0.0, 1.0),) * 5, resolution=121)


def test_prox_grad_refuses_atoms_without_prox():
    f, A, b = instance(REG, "ex6")
    with pytest.raises(oracle.NoProx):
        oracle.prox_grad(f, A, b)


def test_float_objective_infinite_outside_domain():
    f = dsl.parse_function("neglog(x1)")
    obj = oracle.float_objective(f, RationalMatrix.from_rows([[1]]), F(0))
    vals = obj(np.array([[-1.0], [1.0]]))
    assert np.isinf(vals[0]) and np.isclose(vals[1], 0.5)
