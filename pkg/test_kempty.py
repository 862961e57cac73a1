import random
from fractions import Fraction
from math import gcd

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from geometry.kempty import (
    AffK,
    FareyNumber,
    FareyStrip,
    LatticeTriangle,
    StandardTriangle,
    a_value,
    apex_strip,
    apply_affk,
    enumerate_sporadic_minimal,
    farey_sequence,
    farey_strips,
    is_k_empty_apex,
    k_equivalent,
    lattice_equivalent,
    random_affk,
    spike_area,
    spike_area_below_one,
    spike_vertices,
    sporadic_bound,
    standard_form,
    strip_contains,
)
from geometry.polytope import is_k_empty, lattice_points

SPORADIC_COUNTS = {1: 0, 2: 2, 3: 7, 4: 32, 5: 96, 6: 279}


def _apex_triangle(x, y):
    return LatticeTriangle((0, 0), (0, 1), (x, y))


def _seeds(k):
    return [
        _apex_triangle(x, y)
        for x in range(2, 9)
        for y in range(x)
        if is_k_empty_apex(x, y, k)
    ][:4]


def _totient(n):
    return sum(1 for j in range(1, n + 1) if gcd(j, n) == 1)


# --- triangles and Aff_k ----------------------------------------------------

def test_triangle_rejects_degenerate_input():
    with pytest.raises(ValueError, match="collinear"):
        LatticeTriangle((0, 0), (1, 1), (2, 2))
    with pytest.raises(ValueError, match="distinct"):
        LatticeTriangle((0, 0), (0, 0), (1, 0))
    with pytest.raises(ValueError):
        LatticeTriangle.from_points([(0, 0), (1, 0)])


def test_affk_validation():
    with pytest.raises(ValueError, match="unimodular"):
        AffK(((2, 0), (0, 1)), (0, 0), 2)
    with pytest.raises(ValueError, match="2Z"):
        AffK(((1, 0), (0, 1)), (1, 0), 2)
    T = AffK(((0, 1), (1, 0)), (2, -4), 2)
    assert T((1, 3)) == (5, -3)
    assert T.compose(T)((1, 3)) == T(T((1, 3)))


def test_affk_compose_matches_application():
    rng = random.Random(7)
    S = _apex_triangle(5, 2)
    for _ in range(20):
        T1, T2 = random_affk(3, rng), random_affk(3, rng)
        assert apply_affk(T1.compose(T2), S) == T1.apply(T2.apply(S))


@pytest.mark.parametrize(
    "points,k,expected",
    [
        ([(0, 0), (0, 1), (7, 3)], 2, 1),
        ([(0, 0), (0, 2), (2, 0)], 2, 2),
        ([(0, 0), (0, 3), (1, 0)], 3, 1),
    ],
)
def test_a_value(points, k, expected):
    assert a_value(points, k) == expected


def test_a_value_needs_a_k_fold_vertex():
    with pytest.raises(ValueError):
        a_value([(1, 1), (1, 2), (2, 1)], 2)


# --- standard form ----------------------------------------------------------

def test_standard_form_of_remark_triangle():
    st_, T = standard_form(_apex_triangle(5, 3), 2)
    assert st_ == StandardTriangle(1, 5, 2, 2)
    assert set(T.apply(_apex_triangle(5, 3)).vertices) == set(st_.triangle().vertices)


def test_standard_form_with_three_k_fold_vertices():
    S = LatticeTriangle((0, 0), (0, 2), (2, 0))
    st_, _ = standard_form(S, 2)
    assert (st_.a, st_.x, st_.y) == (2, 2, 0)
    assert not st_.is_minimal


def test_standard_form_preconditions():
    with pytest.raises(ValueError, match="not 2-empty"):
        standard_form(LatticeTriangle((0, 0), (0, 4), (4, 0)), 2)
    with pytest.raises(ValueError, match="No vertex"):
        standard_form(LatticeTriangle((1, 1), (1, 2), (2, 1)), 2)


def test_standard_form_is_idempotent():
    for k in (2, 3):
        for S in _seeds(k):
            st_, _ = standard_form(S, k)
            assert standard_form(st_.triangle(), k)[0] == st_


@pytest.mark.property_based
@pytest.mark.parametrize("k", [2, 3, 4])
def test_standard_form_uniqueness_under_random_transforms(k):
    rng = random.Random(1000 + k)
    for S in _seeds(k):
        expected, _ = standard_form(S, k)
        for _ in range(200):
            image = random_affk(k, rng).apply(S)
            got, T = standard_form(image, k)
            assert got == expected
            assert set(T.apply(image).vertices) == set(got.triangle().vertices)


@pytest.mark.property_based
@settings(max_examples=50, deadline=None)
@given(st.integers(2, 4), st.integers(0, 10_000))
def test_invariants_under_affk(k, seed):
    rng = random.Random(seed)
    for S in _seeds(k)[:2]:
        image = random_affk(k, rng).apply(S)
        assert a_value(image, k) == a_value(S, k)
        assert len(lattice_points(image.polytope())) == len(lattice_points(S.polytope()))
        assert is_k_empty(image.polytope(), k)


# --- equivalence ------------------------------------------------------------

def test_remark_triangles_are_2_equivalent():
    assert k_equivalent(_apex_triangle(5, 3), _apex_triangle(5, 2), 2)


def test_one_equivalent_but_not_two_equivalent():
    S1 = LatticeTriangle((0, 0), (0, 1), (2, 0))
    S2 = LatticeTriangle((0, 0), (0, 1), (2, 1))
    assert k_equivalent(S1, S2, 1)
    assert lattice_equivalent(S1, S2, 1) is not None
    assert not k_equivalent(S1, S2, 2)
    assert lattice_equivalent(S1, S2, 2) is None


def test_triangle_is_equivalent_to_itself():
    for k in (1, 2, 3):
        S = _apex_triangle(7, 3)
        assert k_equivalent(S, S, k)


# --- k-emptiness of apex triangles ------------------------------------------

@pytest.mark.parametrize("k", [1, 2, 3, 4])
def test_apex_formula_matches_enumeration(k):
    for x in range(1, 13):
        for y in range(-3, x + 3):
            assert is_k_empty_apex(x, y, k) == is_k_empty(_apex_triangle(x, y).polytope(), k), (x, y, k)


def test_apex_formula_needs_positive_x():
    with pytest.raises(ValueError):
        is_k_empty_apex(0, 1, 2)


# --- Farey strips and spikes ------------------------------------------------

def test_farey_sequences():
    assert [str(f) for f in farey_sequence(1)] == ["0/1"]
    assert [str(f) for f in farey_sequence(2)] == ["0/1", "1/2"]
    assert [str(f) for f in farey_sequence(3)] == ["0/1", "1/3", "1/2", "2/3"]
    with pytest.raises(ValueError):
        farey_sequence(0)


@pytest.mark.parametrize("k", [1, 2, 3, 7, 12, 30, 50])
def test_strip_count_is_totient_sum(k):
    assert len(farey_strips(k)) == sum(_totient(j) for j in range(1, k + 1))


def test_farey_number_validation():
    with pytest.raises(ValueError):
        FareyNumber(2, 4)
    with pytest.raises(ValueError):
        FareyStrip(FareyNumber(1, 3), 2)


@pytest.mark.parametrize("rule", ["kfold", "apex"])
def test_strip_containment(rule):
    F0 = FareyStrip(FareyNumber(0, 1), 2)
    F_half = FareyStrip(FareyNumber(1, 2), 2)
    assert strip_contains(_apex_triangle(5, 2), F0, rule)
    assert not strip_contains(_apex_triangle(1, 0), F0, rule)
    if rule == "kfold":
        # the vertex (0,1) sits on the strict upper edge of F_{2,1/2}
        for x, y in [(3, 1), (5, 3), (7, 4)]:
            assert not strip_contains(_apex_triangle(x, y), F_half, rule)


def test_strip_rule_defaults_to_apex():
    for F in farey_strips(3):
        for x, y in [(3, 1), (5, 2), (5, 3), (7, 4), (8, 3)]:
            S = _apex_triangle(x, y)
            assert strip_contains(S, F) == strip_contains(S, F, "apex")
    assert apex_strip(3, 1, 2) == apex_strip(3, 1, 2, "apex")


def test_apex_strip():
    assert apex_strip(5, 2, 2) == FareyStrip(FareyNumber(0, 1), 2)
    assert apex_strip(2, 0, 2) is None
    with pytest.raises(ValueError):
        strip_contains(_apex_triangle(5, 2), FareyStrip(FareyNumber(0, 1), 2), "segment")


def test_spike_vertices():
    spike = spike_vertices(2, FareyNumber(0, 1), 2)
    assert spike.vertices == ((4, 2), (6, 2), (12, 4))
    assert spike_vertices(3, FareyNumber(0, 1), 3).vertices == ((9, 3), (12, 3), (36, 9))
    assert spike.area == spike_area(2, FareyNumber(0, 1), 2)


def test_spike_area_threshold():
    f = FareyNumber(0, 1)
    assert spike_area(2, f, 3) == Fraction(1)
    assert not spike_area_below_one(2, f, 3)
    assert spike_area(2, f, 4) == Fraction(2, 3)
    assert spike_area_below_one(2, f, 4)


def test_spike_preconditions():
    with pytest.raises(ValueError):
        spike_area(2, FareyNumber(1, 2), 3)
    with pytest.raises(ValueError):
        spike_vertices(2, FareyNumber(0, 1), 1)


@pytest.mark.parametrize("k", [2, 3, 4, 5])
def test_closed_form_area_test_matches_area(k):
    for f in farey_sequence(k):
        if f.f2 == k:
            continue
        for i in range(k - f.f2 + 1, k ** 3 + 2):
            assert spike_area_below_one(k, f, i) == (spike_area(k, f, i) < 1)


# --- sporadic triangles -----------------------------------------------------

@pytest.mark.parametrize("k,bound", [(1, -1), (2, 5), (6, 209)])
def test_sporadic_bound(k, bound):
    assert sporadic_bound(k) == bound


def test_sporadic_triangles_for_k_2():
    found = enumerate_sporadic_minimal(2)
    assert [t.apex for t in found] == [(1, 0), (2, 0)]
    assert [t.apex for t in enumerate_sporadic_minimal(2, rule="kfold")] == [(1, 0), (2, 0)]


def test_sporadic_triangles_for_k_3():
    found = enumerate_sporadic_minimal(3)
    assert [t.apex for t in found] == [(1, 0), (2, 0), (3, 0), (14, 4), (15, 4), (19, 4), (23, 4)]
    strips = farey_strips(3)
    for t in found:
        assert t.is_minimal
        assert t.satisfies_conditions()
        assert is_k_empty(t.triangle().polytope(), 3)
        assert t.x <= sporadic_bound(3)
        assert not any(strip_contains(t.triangle(), F, "apex") for F in strips)


@pytest.mark.parametrize("k", [1, 2, 3])
def test_sporadic_counts_small_k(k):
    assert len(enumerate_sporadic_minimal(k)) == SPORADIC_COUNTS[k]


@pytest.mark.slow
@pytest.mark.parametrize("k", [4, 5, 6])
def test_sporadic_counts_large_k(k):
    found = enumerate_sporadic_minimal(k, workers=2)
    assert len(found) == SPORADIC_COUNTS[k]
    assert all(t.x <= sporadic_bound(k) for t in found)


def test_unknown_strip_rule():
    with pytest.raises(ValueError):
        enumerate_sporadic_minimal(2, rule="vertex")


@pytest.mark.parametrize("k", [2, 3, 4, pytest.param(5, marks=pytest.mark.slow)])
def test_strip_contained_triangles_are_k_empty(k):
    strips = farey_strips(k)
    for x in range(1, 61):
        for y in range(x):
            S = _apex_triangle(x, y)
            if any(strip_contains(S, F, "apex") for F in strips):
                assert is_k_empty_apex(x, y, k), (x, y, k)


@pytest.mark.parametrize("k", [2, 3, 4])
def test_minimal_triangles_are_strip_contained_or_sporadic(k):
    sporadic = {t.apex for t in enumerate_sporadic_minimal(k)}
    strips = farey_strips(k)
    for x in range(1, 2 * sporadic_bound(k) + 1):
        for y in range(x):
            if not is_k_empty_apex(x, y, k):
                continue
            if not StandardTriangle(1, x, y, k).satisfies_conditions():
                continue
            contained = any(strip_contains(_apex_triangle(x, y), F, "apex") for F in strips)
            assert contained or (x, y) in sporadic, (x, y, k)
