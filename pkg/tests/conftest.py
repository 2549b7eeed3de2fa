from fractions import Fraction

import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from solnscope import dsl
from solnscope.ratlin import RationalMatrix

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

small_q = st.fractions(min_value=-4, max_value=4, max_denominator=4)
small_int = st.integers(min_value=-3, max_value=3).map(Fraction)


def matrices(rows, cols, elems=small_int):
    return st.lists(st.lists(elems, min_size=cols, max_size=cols), min_size=rows, max_size=rows).map(
        lambda r: RationalMatrix.from_rows(r, cols=cols)
    )


def F(*vals):
    return tuple(Fraction(v) for v in vals)


# The table instances: (function text, A rows, b).
REG = {
    "ex1": ("lin(1,0)", [[0, 1]], [1]),
    "ex2": ("exp(x1)", [[0, 1]], [1]),
    "ex3": ("hinge(x1)", [[0, 1]], [1]),
    "ex4": ("hinge(x1 - 1) + hinge(-x1 - 1)", [[0, 1]], [1]),
    "ex5": ("hinge_expdiff(x1,x2)", [[1, 0]], [0]),
    "ex6": ("hinge_expdiff(x1,x2)", [[0, 1]], [0]),
    "lasso": ("norm1()", [[1, 0, 2], [0, 2, -2]], [1, 1]),
}
CON = {
    "ex1": ("neglog(x1)", [[1]], [0]),
    "ex2": ("exp(x1)", [[1, 0]], [0]),
    "ex3": ("exp(x1)", [[0, 1]], [0]),
    "ex4": ("hinge_expdiff(x1,x2)", [[1, 0]], [0]),
    "ex5": ("hinge_expdiff(x1,x2)", [[0, 1]], [0]),
}


def instance(table, key):
    text, A, b = table[key]
    return dsl.parse_function(text), RationalMatrix.from_rows(A), F(*b)


@pytest.fixture
def reg():
    return lambda key: instance(REG, key)


@pytest.fixture
def con():
    return lambda key: instance(CON, key)
