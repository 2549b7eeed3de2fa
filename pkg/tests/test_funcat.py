"""Function catalog, DSL and one-dimensional operator graphs.

Conjugates are checked against a numerical supremum and against the
Fenchel-Young equality, neither of which shares code with the catalog.
"""
import math
import random
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.optimize import minimize_scalar

from solnscope import dsl
from solnscope import funcat as FC
from solnscope import graph1d as G1
from solnscope import scalars as S
from solnscope import setalg as SA

from .conftest import F, small_q

ONE_D = ["exp(x1)", "neglog(x1)", "hinge(x1)", "abs(x1)", "quadshift(x1,1/2)", "hinge(2*x1 - 1) + quadshift(x1,0)",
         "abs(x1) + quadshift(x1,1)", "quadshift(x1,1) + quadshift(x1,3)"]


# -- DSL --------------------------------------------------------------------


@pytest.mark.parametrize("text", ONE_D + ["hinge_expdiff(x1,x2)", "norm1()", "lin(1,0)", "hypind(x1,x2)",
                                          "hinge(x1 - 1) + hinge(-x1 - 1)"])
def test_dsl_render_roundtrip(text):
    f = dsl.parse_function(text)
    assert dsl.parse_function(FC.render_expr(f)) == f


def test_dsl_whitespace_insensitive():
    assert dsl.parse_function("hinge( x1-1 )+hinge(-x1 -1)") == dsl.parse_function("hinge(x1 - 1) + hinge(-x1 - 1)")


def test_dsl_unclosed_parenthesis_location():
    with pytest.raises(dsl.ParseError) as exc:
        dsl.parse_function("hinge(x1")
    assert (exc.value.line, exc.value.col) == (1, 6)


def test_dsl_unknown_atom():
    with pytest.raises(dsl.UnknownAtom):
        dsl.parse_function("huber(x1)")


def test_dsl_rejects_general_precomposition():
    with pytest.raises(dsl.ParseError):
        dsl.parse_function("abs(x1 + x2)")


# -- values, subgradients, conjugates --------------------------------------


def _num_conj(f, u: float, R: float = 60) -> float:
    """sup_x u x - f(x) over |x| <= R by bounded scalar search (1-D only)."""
    def neg(x):
        val = FC.eval_f(f, (Fraction(x).limit_denominator(10**9),))
        return math.inf if S.is_inf(val) else -(u * x - S.to_float(val))
    best = min(minimize_scalar(neg, bounds=(lo, hi), method="bounded", options={"xatol": 1e-10}).fun
               for lo, hi in ((-R, R), (1e-9, R), (-R, -1e-9)))
    return -best


@pytest.mark.parametrize("text", ONE_D)
@pytest.mark.parametrize("u", ["-3/2", "-1/2", "0", "1/3", "1", "2"])
def test_conjugate_matches_numerical_supremum(text, u):
    f = dsl.parse_function(text)
    exact = FC.conj_value(f, F(u))
    num = _num_conj(f, float(Fraction(u)))
    if S.is_inf(exact):
        assert _num_conj(f, float(Fraction(u)), 6000) > num + 1  # keeps growing with the box
    else:
        assert abs(S.to_float(exact) - num) < 1e-5


@pytest.mark.parametrize("text", ONE_D + ["hinge_expdiff(x1,x2)", "norm1()"])
def test_fenchel_young_equality_on_subgradients(text):
    f = dsl.parse_function(text)
    n = max(FC.max_index(f) + 1, 1) if text != "norm1()" else 3
    rng = random.Random(7)
    for _ in range(15):
        x = tuple(Fraction(rng.randint(1, 12), rng.randint(1, 4)) * rng.choice((1, -1)) for _ in range(n))
        if text == "neglog(x1)":
            x = (abs(x[0]),)
        if S.is_inf(FC.eval_f(f, x)):
            continue
        for u in SA.sample_points(FC.subdiff(f, x), 3, rng):
            lhs = S.add(FC.eval_f(f, x), FC.conj_value(f, u))
            assert S.eq(lhs, S.vdot(x, u)), (x, u)
            assert SA.contains_point(FC.conj_subdiff(f, u), x)


@given(small_q, small_q)
def test_subgradient_inequality_for_abs_sum(x, y):
    f = dsl.parse_function("hinge(x1 - 1) + hinge(-x1 - 1)")
    for g in SA.sample_points(FC.subdiff(f, (x,)), 3, random.Random(0)):
        assert FC.eval_f(f, (y,)) >= FC.eval_f(f, (x,)) + g[0] * (y - x)


def test_exp_values_are_exact_symbols():
    f = dsl.parse_function("exp(x1)")
    assert S.render(FC.eval_f(f, F(1))) == "e"
    assert S.render(FC.conj_value(f, F(2))) == "-2+2*log(2)" or S.eq(FC.conj_value(f, F(2)), S.sub(S.mul(2, S.log(Fraction(2))), 2))


def test_exp_mixed_with_kinks_has_no_exact_conjugate():
    with pytest.raises(FC.UnsupportedAtom):
        FC.conj_value(dsl.parse_function("2*abs(x1) + exp(x1)"), F(1))


def test_domain_violation():
    with pytest.raises(FC.DomainViolation):
        FC.subdiff(dsl.parse_function("neglog(x1)"), F(-1))


def test_hinge_expdiff_conjugate_open_question_boundary():
    # the ray {0} x (0,inf) is kept outside dom f*
    f = dsl.parse_function("hinge_expdiff(x1,x2)")
    assert S.is_inf(FC.conj_value(f, F(0, 1)))


# -- recession -------------------------------------------------------------


@pytest.mark.parametrize("text,n,kernel", [
    ("lin(1,0)", 2, "{0} x R"),
    ("exp(x1)", 2, "(-inf,0] x R"),
    ("hinge(x1)", 2, "(-inf,0] x R"),
    ("hinge(x1 - 1) + hinge(-x1 - 1)", 2, "{0} x R"),
    ("hinge_expdiff(x1,x2)", 2, "[0,inf) x (-inf,0]"),
    ("norm1()", 3, "{(0,0,0)}"),
])
def test_recession_kernels(text, n, kernel):
    assert SA.render(FC.recession_kernel(dsl.parse_function(text), n)) == kernel


@pytest.mark.parametrize("text", ["exp(x1)", "hinge(x1)", "hinge_expdiff(x1,x2)", "hinge(x1 - 1) + hinge(-x1 - 1)"])
def test_kernel_directions_keep_f_bounded(text):
    f = dsl.parse_function(text)
    K = FC.recession_kernel(f, 2)
    x0 = (Fraction(2), Fraction(0))
    for d in SA.sample_points(K, 5, random.Random(3)):
        vals = [S.to_float(FC.eval_f(f, tuple(a + 1000 * b for a, b in zip(x0, d))))]
        assert vals[0] <= S.to_float(FC.eval_f(f, x0)) + 1e-9 or np.isclose(vals[0], S.to_float(FC.eval_f(f, x0)))


# -- operator graphs --------------------------------------------------------


@pytest.mark.parametrize("text,a", [
    ("hinge(x1)", (0, 1)), ("hinge(x1 - 1) + hinge(-x1 - 1)", (0, 1)), ("hinge_expdiff(x1,x2)", (1, 0)),
    ("hinge_expdiff(x1,x2)", (0, 1)), ("exp(x1)", (1, 0)), ("neglog(x1)", (1,)), ("abs(x1) + quadshift(x2,1)", (1, 1)),
])
def test_line_section_graph_matches_pointwise_image(text, a):
    f = dsl.parse_function(text)
    a = F(*a)
    G = G1.line_section(f, a).G
    for v in [Fraction(k, 4) for k in range(-8, 9)]:
        direct = FC.conj_subdiff(f, tuple(v * c for c in a))
        want = SA.image_1d(direct, a)
        got = G.evaluate(v)
        if want is None:
            assert got is None or got.is_empty(), (v, got)
        else:
            assert got is not None and got.render() == want.render(), (v, got, want)


@given(st.fractions(min_value=-5, max_value=5, max_denominator=8))
def test_resolvent_solves_inclusion(b):
    G = G1.line_section(dsl.parse_function("hinge(x1 - 1) + hinge(-x1 - 1) + quadshift(x2,0)"), F(1, 1)).G
    r = G.resolvent(b)
    assert r is not None
    assert G.evaluate(r).contains(S.sub(b, r))


def test_graph_ranges_for_table_operators():
    exdiff = G1.line_section(dsl.parse_function("hinge_expdiff(x1,x2)"), F(1, 0)).G
    assert exdiff.render("y") == "(0,inf) if y=0; empty otherwise"
    assert [iv.render() for iv in exdiff.shift_identity().range()] == ["(0,inf)"]
