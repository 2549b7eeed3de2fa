"""Convex set algebra: rendering, intersection, projection, recession."""
import random
import time
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from solnscope import setalg as SA
from solnscope.ratlin import Subspace
from solnscope.scalars import NEG_INF, POS_INF

from .conftest import F, small_int

I = SA.Interval


def test_render_interval_products():
    assert SA.render(SA.Product((I(NEG_INF, 0), I.point(1)))) == "(-inf,0] x {1}"
    assert SA.render(SA.Product((I(1, POS_INF), I.point(0)))) == "[1,inf) x {0}"
    assert SA.render(SA.Product((I(-1, 1), I.point(1)))) == "[-1,1] x {1}"
    assert SA.render(SA.Empty(2)) == "empty"
    assert SA.render(SA.Point(F(0, 1))) == "{(0,1)}"


def test_interval_open_ends():
    assert I(0, POS_INF, lo_open=True).render() == "(0,inf)"
    assert I(0, 1, lo_open=True).contains(Fraction(1)) and not I(0, 1, lo_open=True).contains(0)


def test_interval_hull_union_merges_touching():
    parts = SA.interval_hull_union([I(0, 1), I(1, 2, lo_open=True), I(5, 6)])
    assert [p.render() for p in parts] == ["[0,2]", "[5,6]"]


def test_intersect_flat_axis():
    X = SA.Product((I(NEG_INF, 0), I.real()))
    line = SA.AffineFlat(F(0, 1), Subspace.span(2, [(1, 0)]))
    assert SA.render(SA.intersect_flat(X, line)) == "(-inf,0] x {1}"


def test_projection_can_strictly_contain_intersection():
    # the square [1,2]^2 misses the x1 axis but projects onto [1,2] x {0}
    C = SA.box(F(1, 1), F(2, 2))
    D = Subspace.span(2, [(1, 0)])
    assert SA.is_empty(SA.intersect_flat(C, SA.AffineFlat.subspace(D)))
    assert SA.render(SA.project_subspace(C, D)) == "[1,2] x {0}"


def test_projection_of_orthant_onto_skew_line():
    C = SA.Product((I(0, POS_INF),) * 3)
    W = Subspace.span(3, [(-2, 1, 1)])
    assert SA.render(SA.project_subspace(C, W)) == "span{(-2,1,1)}"


def test_exp_hypograph_recession():
    K = SA.recession_cone(SA.ExpHypograph(2, 0, 1))  # {x : x1 >= exp(x2)}
    assert SA.render(K) == "[0,inf) x (-inf,0]"


def test_singleton_and_boundedness():
    P = SA.Polyhedron.build(2, ineqs=[(F(1, 0), 0), (F(-1, 0), 0)], eqs=[(F(0, 1), 3)])
    assert SA.is_singleton(P) == F(0, 3)
    assert SA.is_bounded(P)
    assert not SA.is_bounded(SA.Product((I.real(), I.point(0))))


def test_equal_across_representations():
    P = SA.Polyhedron.build(2, ineqs=[(F(1, 0), 0)], eqs=[(F(0, 1), 1)])
    Q = SA.Product((I(NEG_INF, 0), I.point(1)))
    assert SA.equal(P, Q)
    assert not SA.equal(P, SA.Product((I(NEG_INF, 1), I.point(1))))


def test_relative_interior_of_segment():
    ri = SA.relative_interior(SA.Product((I(-1, 1), I.point(0))))
    assert SA.contains_point(ri, F(0, 0)) and not SA.contains_point(ri, F(1, 0))


@given(st.lists(small_int, min_size=2, max_size=2), st.lists(small_int, min_size=2, max_size=2))
def test_translate_roundtrip(lo, shift):
    X = SA.box(lo, [v + 1 for v in lo])
    Y = SA.translate(SA.translate(X, shift), [-v for v in shift])
    assert SA.equal(X, Y)


@given(st.lists(small_int, min_size=3, max_size=3), st.integers(0, 2**31))
def test_sample_points_are_members(lo, seed):
    X = SA.box(lo, [v + 2 for v in lo])
    for p in SA.sample_points(X, 5, random.Random(seed)):
        assert SA.contains_point(X, p)


# -- recession identities on random polyhedra ------------------------------


def _random_case(rng: random.Random):
    n = rng.randint(1, 4)
    k = rng.randint(0, n - 1)  # proper subspace
    D = Subspace.span(n, [[rng.randint(-2, 2) for _ in range(n)] for _ in range(k)])
    # anchor a point of D inside C so that C & D is nonempty
    coeff = [Fraction(rng.randint(-3, 3)) for _ in D.basis]
    p = tuple(sum((c * v[i] for c, v in zip(coeff, D.basis)), Fraction(0)) for i in range(n))
    rows = []
    for _ in range(rng.randint(1, 2 * n + 1)):
        a = tuple(Fraction(rng.randint(-3, 3)) for _ in range(n))
        slack = Fraction(rng.randint(0, 4), rng.randint(1, 3))
        rows.append((a, sum((x * y for x, y in zip(a, p)), Fraction(0)) + slack))
    return SA.Polyhedron.build(n, ineqs=rows), D, p


def _recession_by_definition(C: SA.Polyhedron) -> SA.Polyhedron:
    # {d : a.d <= 0 for each inequality, c.d = 0 for each equality}
    return SA.Polyhedron(C.n, tuple((a, Fraction(0), False) for a, _, _ in C.ineqs), tuple((c, Fraction(0)) for c, _ in C.eqs))


def test_recession_lemma_identities_on_200_random_polyhedra():
    rng = random.Random(20240611)
    start = time.perf_counter()
    for _ in range(200):
        C, D, p = _random_case(rng)
        flat = SA.AffineFlat.subspace(D)
        CD = SA.intersect_flat(C, flat)
        rec_C = SA.recession_cone(C)
        assert SA.equal(rec_C, _recession_by_definition(C))
        # (i) recession of the section equals the section of the recession cone
        assert SA.equal(SA.recession_cone(CD), SA.intersect_flat(rec_C, flat))
        # (ii) translating by a member leaves the recession cone alone
        for x0 in [p] + SA.sample_points(C, 2, rng):
            assert SA.equal(SA.recession_cone(SA.translate(C, [-v for v in x0])), rec_C)
        # (iii) the section sits inside the projection
        assert SA.contains(SA.project_subspace(C, D), CD)
    assert time.perf_counter() - start < 60


def test_section_can_be_strictly_smaller_than_projection():
    C = SA.Polyhedron.build(2, ineqs=[(F(0, -1), -1), (F(1, 0), 1), (F(-1, 0), 1)])  # [-1,1] x [1,inf)
    D = Subspace.span(2, [(1, 0)])
    assert SA.is_empty(SA.intersect_flat(C, SA.AffineFlat.subspace(D)))
    assert not SA.is_empty(SA.project_subspace(C, D))


def test_recession_of_empty_set_raises():
    with pytest.raises(SA.EmptySet):
        SA.recession_cone(SA.Empty(2))
