from fractions import Fraction
from itertools import product

import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from geometry.exact import rank
from geometry.polytope import (
    BOUNDARY,
    INTERIOR,
    OUTSIDE,
    VPolytope,
    contains,
    is_canonical_polytope,
    is_k_empty,
    is_terminal_polytope,
    k_empty_witness,
    k_fold_points,
    lattice_points,
    q_gorenstein,
    quadrangle_polytope,
)

UNIT_SQUARE = VPolytope.from_points([(0, 0), (1, 0), (0, 1), (1, 1), (Fraction(1, 2), Fraction(1, 2))])

coords = st.integers(-4, 4)
points_2d = st.tuples(coords, coords)
point_sets = st.lists(points_2d, min_size=3, max_size=6, unique=True)


def _brute_points(P):
    box = P.bounding_box()
    return [p for p in product(*(range(lo, hi + 1) for lo, hi in box)) if contains(P, p) != OUTSIDE]


def test_from_points_drops_redundant_points():
    assert UNIT_SQUARE.vertices == tuple(
        (Fraction(x), Fraction(y)) for x, y in [(0, 0), (0, 1), (1, 0), (1, 1)]
    )
    assert UNIT_SQUARE.dimension == 2
    assert len(UNIT_SQUARE.facets) == 4


def test_lower_dimensional_polytope_has_affine_hull():
    seg = VPolytope.from_points([(0, 0, 0), (2, 2, 2)])
    assert seg.dimension == 1
    assert not seg.is_full_dimensional
    assert len(seg.affine_hull()) == 2
    assert lattice_points(seg) == [(0, 0, 0), (1, 1, 1), (2, 2, 2)]
    assert contains(seg, (1, 1, 1)) == INTERIOR
    assert contains(seg, (1, 1, 0)) == OUTSIDE


@pytest.mark.parametrize(
    "point,expected",
    [((Fraction(1, 2), Fraction(1, 3)), INTERIOR), ((1, Fraction(1, 2)), BOUNDARY), ((0, 0), BOUNDARY), ((2, 0), OUTSIDE)],
)
def test_contains_on_square(point, expected):
    assert contains(UNIT_SQUARE, point) == expected
    assert contains(UNIT_SQUARE, point, method="lp") == expected


def test_contains_rejects_bad_input():
    with pytest.raises(ValueError):
        contains(UNIT_SQUARE, (0, 0, 0))
    with pytest.raises(ValueError):
        contains(UNIT_SQUARE, (0, 0), method="ray")


def test_transformations():
    P = UNIT_SQUARE.scale(2).translate((1, -1))
    assert P.vertices[0] == (1, -1)
    assert P.vertices[-1] == (3, 1)
    Q = UNIT_SQUARE.apply_affine([[1, 1], [0, 1]], (0, 0))
    assert Q.has_vertex((2, 1))
    assert len(lattice_points(Q)) == 4


def test_lattice_points_of_rational_triangle():
    T = VPolytope.from_points([(0, 0), (Fraction(5, 2), 0), (0, Fraction(5, 2))])
    assert lattice_points(T) == [(0, 0), (0, 1), (0, 2), (1, 0), (1, 1), (2, 0)]


@pytest.mark.property_based
@settings(max_examples=60, deadline=None)
@given(point_sets, points_2d)
def test_hrep_and_lp_membership_agree(pts, q):
    assume(rank([[a - pts[0][0], b - pts[0][1]] for a, b in pts[1:]]) == 2)
    P = VPolytope.from_points(pts)
    assert contains(P, q) == contains(P, q, method="lp")


@pytest.mark.property_based
@settings(max_examples=40, deadline=None)
@given(point_sets)
def test_lattice_points_match_box_scan(pts):
    P = VPolytope.from_points(pts)
    assert lattice_points(P) == sorted(_brute_points(P))


@pytest.mark.property_based
@settings(max_examples=40, deadline=None)
@given(point_sets, st.integers(1, 3))
def test_k_fold_points_are_the_multiples(pts, k):
    P = VPolytope.from_points(pts)
    expected = sorted(p for p in lattice_points(P) if all(x % k == 0 for x in p))
    assert sorted(k_fold_points(P, k)) == expected


def test_k_emptiness():
    T = VPolytope.from_points([(0, 0), (0, 1), (3, 1)])
    assert is_k_empty(T, 2)
    assert k_empty_witness(T, 2) is None
    big = VPolytope.from_points([(0, 0), (0, 4), (4, 0)])
    assert not is_k_empty(big, 2)
    assert k_empty_witness(big, 2) == (0, 2)
    with pytest.raises(ValueError):
        k_fold_points(big, 0)


def test_q_gorenstein_index():
    P = VPolytope.from_points([(0, 0, 0), (1, 0, 2), (0, 1, 2), (1, 1, 2)])
    data = q_gorenstein(P)
    assert data.alpha == (0, 0, 1)
    assert data.index == 2


def test_q_gorenstein_needs_origin_and_full_dimension():
    with pytest.raises(ValueError):
        q_gorenstein(VPolytope.from_points([(1, 0, 0), (0, 1, 0), (0, 0, 1), (1, 1, 1)]))
    with pytest.raises(ValueError):
        q_gorenstein(VPolytope.from_points([(0, 0, 0), (1, 0, 0), (0, 1, 0)]))


def test_not_q_gorenstein_returns_none():
    # the nonzero vertices do not lie on one affine hyperplane missing the origin
    P = VPolytope.from_points([(0, 0), (1, 0), (0, 1), (2, 3)])
    assert q_gorenstein(P) is None
    with pytest.raises(ValueError, match="not Q-Gorenstein"):
        is_canonical_polytope(P)


def test_canonical_and_terminal_simplex():
    P = VPolytope.from_points([(0, 0, 0), (1, 0, 1), (0, 1, 1), (0, 0, 1)])
    assert is_canonical_polytope(P).holds
    assert is_terminal_polytope(P).holds
    Q = VPolytope.from_points([(0, 0, 0), (2, 0, 1), (0, 2, 1), (0, 0, 1)])
    assert is_canonical_polytope(Q).holds
    t = is_terminal_polytope(Q)
    assert not t.holds
    assert t.witness is not None


@pytest.mark.parametrize("index", [2, 3, 4, 5])
@pytest.mark.parametrize("a,b", [(-3, -3), (-1, 2), (0, 0), (3, 1)])
def test_quadrangle_polytopes_are_not_canonical(index, a, b):
    v = is_canonical_polytope(quadrangle_polytope(a, b, index))
    assert not v.holds
    x, y, z = v.witness
    assert 0 < z < index
