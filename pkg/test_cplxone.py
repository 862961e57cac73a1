import random
from fractions import Fraction

import pytest
from sympy import Matrix, Rational

from singularities.catalog import instantiate, list_entries
from singularities.cplxone import (
    LINEALITY,
    AdmissibleOp,
    DefiningMatrix,
    LeafPoint,
    NormalFormInfo,
    NotInNormalFormError,
    admissible,
    anticanonical_forms,
    discrepancy,
    elementary_cones,
    ensure_valid,
    is_log_terminal,
    is_platonic,
    leaf_complex,
    local_coordinates,
    normal_form_info,
    random_admissible_sequence,
    validate,
    verdict,
    witness_in_global,
)

P1_ROWS = [[-3, -1, 3, 0], [-3, -1, 0, 2], [1, 0, 0, -1], [-4, 0, 2, 2]]
P2_ROWS = [[-3, -1, 3, 1, 0], [-3, -1, 0, 0, 2], [1, 0, 0, -1, -1], [-4, 0, 2, 2, 2]]
P6_ROWS = [[-4, 3, 0, 0], [-4, 0, 2, 0], [0, 0, 1, 5], [3, -2, 0, 1]]
P27_ROWS = [[-3, 3, 0, 0], [-3, 0, 1, 1], [0, 1, 0, 1], [2, 0, 0, 0]]
P1_INDEX_5 = [[-3, -1, 3, 0], [-3, -1, 0, 2], [1, 0, 0, -1], [-10, 0, 5, 5]]


@pytest.fixture
def p1():
    return DefiningMatrix.from_matrix(P1_ROWS)


# --- structure --------------------------------------------------------------

def test_block_structure_is_detected(p1):
    assert [b.n for b in p1.blocks] == [2, 1, 1]
    assert p1.m == 0 and p1.r == 2
    assert p1.maximal_tuple() == (3, 3, 2)
    assert p1.column_labels() == ["T01", "T02", "T11", "T21"]
    assert p1.to_matrix() == P1_ROWS
    p6 = DefiningMatrix.from_matrix(P6_ROWS)
    assert p6.m == 1 and p6.lineality == ((5, 1),)


def test_from_matrix_rejects_misplaced_columns():
    with pytest.raises(ValueError, match="fits no column block"):
        DefiningMatrix.from_matrix([[1, 1, 0], [1, 0, 1], [0, 1, 1], [1, 1, 1]])
    with pytest.raises(ValueError):
        DefiningMatrix.from_matrix([[1, 2], [3, 4]])
    with pytest.raises(ValueError, match="add up"):
        DefiningMatrix.from_matrix(P1_ROWS, block_sizes=[1, 1, 1], m=0)


def test_leaf_points(p1):
    assert local_coordinates(p1, 0) == LeafPoint(0, 3, 1, -4)
    assert LeafPoint(2, 0, 1, 1).leaf == LINEALITY
    with pytest.raises(ValueError):
        LeafPoint(0, -1, 0, 0)
    assert witness_in_global(p1, LeafPoint(0, 1, 0, -1)) == (-1, -1, 0, -1)
    assert witness_in_global(p1, LeafPoint(1, 2, 0, 3)) == (2, 0, 0, 3)


def test_columns_round_trip_through_leaf_coordinates(p1):
    columns = [tuple(col) for col in zip(*P1_ROWS)]
    for c, column in enumerate(columns):
        p = local_coordinates(p1, c)
        assert p1.global_point(p.leaf, p.t, p.a, p.b) == column
    assert p1.global_point(LINEALITY, 0, 1, 2) == (0, 0, 1, 2)


# --- validation -------------------------------------------------------------

def test_p1_is_valid(p1):
    assert validate(p1) == []
    ensure_valid(p1)


def test_duplicated_column_is_reported():
    rows = [[-3, -1, -1, 3, 0], [-3, -1, -1, 0, 2], [1, 0, 0, 0, -1], [-4, 0, 0, 2, 2]]
    problems = validate(DefiningMatrix.from_matrix(rows))
    assert any("coincide" in p for p in problems)


def test_non_primitive_column_is_reported():
    rows = [[-6, -1, 3, 0], [-6, -1, 0, 2], [2, 0, 0, -1], [-8, 0, 2, 2]]
    problems = validate(DefiningMatrix.from_matrix(rows))
    assert any("not primitive" in p for p in problems)
    with pytest.raises(ValueError, match="Invalid defining matrix"):
        ensure_valid(DefiningMatrix.from_matrix(rows))


def test_index_three_variant_of_p1_is_not_a_defining_matrix():
    rows = [[-3, -1, 3, 0], [-3, -1, 0, 2], [1, 0, 0, -1], [-6, 0, 3, 3]]
    assert any("(3, 0, 0, 3) is not primitive" in p for p in validate(DefiningMatrix.from_matrix(rows)))


def test_redundant_block_is_optional():
    P = DefiningMatrix.from_blocks([(2,), (1,), (3,)], [((1,), (0,)), ((0,), (1,)), ((1,), (1,))], [(1, 1)])
    assert any("redundant" in p for p in validate(P))
    assert not any("redundant" in p for p in validate(P, include_redundancy=False))


@pytest.mark.parametrize(
    "t,expected",
    [((5, 3, 2, 1, 1), True), ((7, 5, 1), True), ((5, 4, 2), False), ((9, 2, 2), True), ((4,), True), ((2, 2, 2, 2), False)],
)
def test_is_platonic(t, expected):
    assert is_platonic(t) == expected


def test_log_terminality(p1):
    assert is_log_terminal(p1)
    bad = DefiningMatrix.from_blocks([(4,), (4,), (3,)], [((1,), (0,)), ((0,), (1,)), ((1,), (1,))])
    assert not is_log_terminal(bad)
    with pytest.raises(ValueError, match="not log terminal"):
        elementary_cones(bad)
    with pytest.raises(ValueError):
        is_platonic(())


# --- admissible operations --------------------------------------------------

def test_named_admissible_operations(p1):
    p2 = DefiningMatrix.from_matrix(P2_ROWS)
    swapped = admissible(p2, AdmissibleOp("swap_columns", (0, 0, 1)))
    ensure_valid(swapped)
    assert swapped.blocks[0].l == (1, 3)
    negated = admissible(p1, AdmissibleOp("last_rows", (-1, 0, 0, 1)))
    ensure_valid(negated)
    assert negated.to_matrix()[2] == [-1, 0, 0, 1]
    added = admissible(p1, AdmissibleOp("add_upper_row", (1, 0, 2)))
    ensure_valid(added)
    assert added.to_matrix()[2] == [x + 2 * y for x, y in zip(P1_ROWS[2], P1_ROWS[0])]


@pytest.mark.parametrize(
    "op",
    [
        AdmissibleOp("last_rows", (2, 0, 0, 1)),
        AdmissibleOp("swap_columns", (1, 0, 1)),
        AdmissibleOp("add_upper_row", (3, 0, 1)),
        AdmissibleOp("swap_lineality", (0, 1)),
        AdmissibleOp("rotate", ()),
    ],
)
def test_invalid_admissible_operations(p1, op):
    with pytest.raises(ValueError):
        admissible(p1, op)


@pytest.mark.property_based
@pytest.mark.parametrize("rows", [P1_ROWS, P2_ROWS, P6_ROWS, P27_ROWS])
def test_verdict_survives_admissible_operations(rows):
    P = DefiningMatrix.from_matrix(rows)
    expected = verdict(P)
    rng = random.Random(sum(map(sum, rows)))
    for _ in range(10):
        Q, ops = random_admissible_sequence(P, 6, rng, preserve_normal_form=True)
        assert len(ops) == 6
        ensure_valid(Q)
        assert normal_form_info(Q) == expected.normal_form
        v = verdict(Q)
        assert (v.canonical, v.terminal) == (expected.canonical, expected.terminal)


# --- normal forms -----------------------------------------------------------

@pytest.mark.parametrize(
    "rows,info",
    [
        (P1_ROWS, NormalFormInfo("zeta1", 2, 1)),
        (P6_ROWS, NormalFormInfo("i", 2, 2)),
        (P27_ROWS, NormalFormInfo("vi", 3, 3, -1)),
    ],
)
def test_normal_form_info(rows, info):
    assert normal_form_info(DefiningMatrix.from_matrix(rows)) == info


def test_matrix_outside_normal_forms():
    rows = [[-3, -1, 3, 0], [-3, -1, 0, 2], [1, 0, 0, -1], [-4, 0, 2, 3]]
    P = DefiningMatrix.from_matrix(rows)
    with pytest.raises(NotInNormalFormError):
        normal_form_info(P)
    with pytest.raises(NotInNormalFormError):
        verdict(P)


# --- elementary cones and the anticanonical complex -------------------------

def test_elementary_cones_of_p1(p1):
    cones = elementary_cones(p1)
    assert [c.choice for c in cones] == [(0, 0, 0), (1, 0, 0)]
    first = cones[0]
    assert first.ell_i == (6, 6, 9)
    assert first.ell_tau == 3
    assert first.v_tau == (0, 0, -3, 6)
    assert first.v_tau_prime.coords == (0, -1, 2)
    assert all(c.is_face for c in cones)


def test_elementary_cone_with_unit_exponents():
    P = DefiningMatrix.from_blocks([(1,), (1,), (1,)], [((0,), (1,)), ((1,), (1,)), ((0,), (1,))])
    (cone,) = elementary_cones(P)
    assert cone.ell_i == (1, 1, 1)
    assert cone.ell_tau == 2


def test_leaf_complex_of_p1(p1):
    leaf0 = leaf_complex(p1, 0)
    assert {(0, 0, 0), (3, 1, -4), (1, 0, 0), (0, -1, 2)} <= set(leaf0.polytope.vertices)
    # b = 2 - 2t
    assert leaf0.plane == (2, 0, 1, -2)
    assert leaf_complex(p1, 1).plane == (0, 0, 1, -2)
    with pytest.raises(ValueError):
        leaf_complex(p1, 3)


def test_columns_lie_on_leaf_planes():
    for entry in list_entries("matrix"):
        P = instantiate(entry.id)
        info = normal_form_info(P)
        for i in range(P.r + 1):
            c_t, c_a, c_b, c_0 = leaf_complex(P, i).plane
            for t, a, b in P.local_columns(i) + P.lineality_points():
                assert c_t * t + c_a * a + c_b * b + c_0 == 0, (entry.id, i)
        for cone in elementary_cones(P):
            if cone.is_face:
                assert cone.v_tau_prime.b == Fraction(info.iota, info.zeta), entry.id


def test_lineality_columns_of_p26_lie_on_every_plane():
    P = instantiate("P_26", {"d": [2], "dprime": [0, 4]})
    assert P.m == 2
    for i in range(P.r + 1):
        c_t, c_a, c_b, c_0 = leaf_complex(P, i).plane
        assert all(c_b * b + c_0 == 0 for _, _, b in P.lineality_points())


def test_intrinsic_forms_of_p1(p1):
    forms = anticanonical_forms(p1)
    assert forms[0] == (1, 0, Fraction(1, 2))
    assert forms[1] == (0, 0, Fraction(1, 2))


# --- verdicts ---------------------------------------------------------------

def test_p1_is_canonical(p1):
    v = verdict(p1)
    assert v.log_terminal and v.canonical
    assert v.normal_form.case == "zeta1"


def test_index_five_variant_is_not_canonical():
    P = DefiningMatrix.from_matrix(P1_INDEX_5)
    v = verdict(P)
    assert not v.canonical and not v.terminal
    assert (-1, -1, 0, -1) in [witness_in_global(P, w) for w in v.witnesses]
    assert discrepancy(P, LeafPoint(0, 1, 0, -1)) == Fraction(-1, 5)


def test_non_log_terminal_verdict():
    P = DefiningMatrix.from_blocks(
        [(4,), (4,), (3,)], [((1,), (0,)), ((0,), (1,)), ((1,), (1,))], [(1, -1)]
    )
    assert validate(P) == []
    v = verdict(P)
    assert not v.log_terminal and not v.canonical and not v.terminal


def test_discrepancy(p1):
    for c in range(4):
        assert discrepancy(p1, local_coordinates(p1, c)) == 0
    assert discrepancy(p1, LeafPoint(LINEALITY, 0, -1, 2)) == 0
    with pytest.raises(ValueError, match="primitive"):
        discrepancy(p1, LeafPoint(0, 2, 0, 2))
    with pytest.raises(ValueError, match="never meets"):
        discrepancy(p1, LeafPoint(1, 1, 0, -1))


def test_verdict_without_normal_form_uses_intrinsic_planes(p1):
    v = verdict(p1, require_normal_form=False)
    assert v.canonical
    assert v.notes == ()


def test_point_below_the_plane_matches_weights_on_total_coordinates():
    P = instantiate("P_58", {"zeta": 7})
    point = LeafPoint(0, 2, 1, 0)
    x = witness_in_global(P, point)
    assert x == (-2, -2, 1, 0)
    assert discrepancy(P, point) == Fraction(-1, 3)
    w = Matrix(P.to_matrix()).LUsolve(Matrix(x))
    assert list(w) == [Rational(1, 3), Rational(1, 3), Rational(2, 3), Rational(2, 3)]
    # T01^10 + T11^4 + T21*T22 attains its order twice at w
    orders = sorted([10 * w[0], 4 * w[1], w[2] + w[3]])
    assert orders[0] == orders[1]
    assert sum(w) - orders[0] - 1 == Rational(-1, 3)


@pytest.mark.parametrize("entry_id,leaf", [("P_51", 1), ("P_64", 0)])
def test_two_columns_of_one_leaf_leave_a_point_below(entry_id, leaf):
    P = instantiate(entry_id)
    assert P.local_columns(leaf)[:2] == [(3, 1, 0), (3, 2, 0)]
    assert discrepancy(P, LeafPoint(leaf, 2, 1, 0)) == Fraction(-1, 3)
    assert LeafPoint(leaf, 2, 1, 0) in verdict(P).witnesses
