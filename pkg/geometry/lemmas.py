# geometry/lemmas.py
"""
Closed-form canonicity predicates for rational cone sections in the plane,
and the list of Q-Gorenstein canonical lattice polytopes of dimension three
that are not Gorenstein.
"""

import logging
from dataclasses import dataclass
from fractions import Fraction
from math import gcd
from typing import Optional, Tuple

from geometry.exact import ext_gcd
from geometry.polytope import VPolytope

logger = logging.getLogger(__name__)

COROLLARY_VARIANTS = ("halfcone", "halfhalfcone", "c13", "c1313")
POLYGON_VARIANTS = COROLLARY_VARIANTS + ("ncone", "2_5", "1245")
II_CASES = ("i", "ii", "iii", "iv", "v", "vi")
_FIXED_INDEX = {"i": 1, "ii": 2, "iv": 2, "v": 2, "vi": 3}


def _require_index(index: int) -> None:
    if index < 2:
        raise ValueError(f"index must be at least 2, got {index}")


def ncone_canonical(k: int, index: int, q: int) -> bool:
    """conv((0,0), (k,i), (k+1/q,i)) is canonical iff kc = -1 mod i for some 0 < c < q."""
    _require_index(index)
    if q < 2:
        raise ValueError(f"q must be at least 2, got {q}")
    if gcd(k, index) != 1:
        return False
    c = (-pow(k, -1, index)) % index
    return 0 < c < q


def corollary_predicate(variant: str, k: int, index: int) -> bool:
    _require_index(index)
    if variant == "halfcone":
        return (k + 1) % index == 0
    if variant == "halfhalfcone":
        return index == 2 and k % 2 == 1
    if variant == "c13":
        return (k + 1) % index == 0 or (index % 2 == 1 and k % index == (index - 1) // 2)
    if variant == "c1313":
        return (index == 2 and k % 2 == 1) or (index == 3 and k % 3 != 0)
    raise ValueError(f"Unknown corollary variant: {variant}")


def lemma_2_5(k: int, index: int) -> bool:
    """Canonicity of conv((0,0), (k,i), (k+2/5,i)); agrees with the 1/3 cone."""
    return corollary_predicate("c13", k, index)


def cone_1245_lattice_free(k: int, index: int) -> bool:
    """conv((0,0), (k+1/2,i), (k+4/5,i)) has no lattice point besides the origin."""
    _require_index(index)
    r = k % index
    return r in (0, index - 1) or (index % 2 == 0 and r == index // 2 - 1)


def halfheight_lattice_free(i: int, j: int, k: int) -> bool:
    """conv((0,0), (i,k+1/2), (j,k+1/2)) has no lattice point besides the origin."""
    if i == j:
        raise ValueError("halfheight_lattice_free() needs i != j")
    if k < 0:
        raise ValueError("k must be non-negative")
    return k == 0


def lemma_polygon(variant: str, k: int, index: int, q: Optional[int] = None) -> VPolytope:
    """
    The polygon a predicate of this module speaks about, origin included.

    Args:
        variant: "ncone" (needs q), "halfcone", "c13", "halfhalfcone", "c1313", "2_5" or "1245"
        k: integer offset
        index: height of the top edge

    Returns:
        VPolytope conv((0,0), left, right)
    """
    _require_index(index)
    k = Fraction(k)
    if variant == "ncone":
        if q is None or q < 2:
            raise ValueError("variant 'ncone' needs q >= 2")
        top = (k, k + Fraction(1, q))
    elif variant == "halfcone":
        top = (k, k + Fraction(1, 2))
    elif variant == "c13":
        top = (k, k + Fraction(1, 3))
    elif variant == "halfhalfcone":
        top = (k - Fraction(1, 2), k + Fraction(1, 2))
    elif variant == "c1313":
        top = (k - Fraction(1, 3), k + Fraction(1, 3))
    elif variant == "2_5":
        top = (k, k + Fraction(2, 5))
    elif variant == "1245":
        top = (k + Fraction(1, 2), k + Fraction(4, 5))
    else:
        raise ValueError(f"Unknown lemma polygon: {variant}")
    return VPolytope.from_points([(0, 0), (top[0], index), (top[1], index)])


def halfheight_polygon(i: int, j: int, k: int) -> VPolytope:
    if i == j:
        raise ValueError("halfheight_polygon() needs i != j")
    h = Fraction(2 * k + 1, 2)
    return VPolytope.from_points([(0, 0), (i, h), (j, h)])


# --- non-Gorenstein canonical toric threefolds ------------------------------

@dataclass(frozen=True)
class IICase:
    case: str
    n: int = 0
    m: int = 0
    index: int = 0

    def __post_init__(self):
        if self.case not in II_CASES:
            raise ValueError(f"Unknown case: {self.case}")
        if self.index == 0:
            object.__setattr__(self, "index", _FIXED_INDEX.get(self.case, 0))
        if self.case == "ii":
            if self.n < 1 or self.m < 1 or self.index != 2:
                raise ValueError("case (ii) needs n, m >= 1 and index 2")
        elif self.case == "iii":
            if self.n < 1 or self.m < 1 or self.index < 2:
                raise ValueError("case (iii) needs n, m >= 1 and index >= 2")
            if gcd(self.n, self.index) != 1:
                raise ValueError("case (iii) needs gcd(n, index) = 1")
        elif self.case == "iv":
            if self.m < 2 or self.index != 2:
                raise ValueError("case (iv) needs m >= 2 and index 2")
        elif self.case == "v" and self.index != 2:
            raise ValueError("case (v) has index 2")
        elif self.case == "vi" and self.index != 3:
            raise ValueError("case (vi) has index 3")

    @property
    def is_terminal(self) -> bool:
        return self.case == "iii" and self.m == 1


def ii_vertices(c: IICase) -> Tuple[Tuple[int, int, int], ...]:
    """Nonzero vertices of the case polytope."""
    n, m, i = c.n, c.m, c.index
    if c.case == "ii":
        return ((1, 0, 2), (1 + m, 1, 2), (1, 2, 2), (1 - n, 1, 2))
    if c.case == "iii":
        return ((1, n, i), (0, n, i), (1, n + m, i))
    if c.case == "iv":
        return ((1, 1, 2), (0, 1, 2), (2, 1 + 2 * m, 2))
    if c.case == "v":
        return ((1, -2, 2), (-1, -1, 2), (2, 1, 2))
    if c.case == "vi":
        return ((1, -1, 3), (0, -1, 3), (2, 2, 3))
    raise ValueError("case (i) is the whole Gorenstein family and has no single polytope")


def ii_polytope(c: IICase) -> VPolytope:
    return VPolytope.from_points(((0, 0, 0),) + ii_vertices(c))


@dataclass(frozen=True)
class ExpectedClassGroup:
    """Cl(X) = Z^free_rank + sum Z/t, degree rows ordered torsion first, then free."""
    free_rank: int
    torsion: Tuple[int, ...]
    degrees: Tuple[Tuple[int, ...], ...]


def ii_class_group_expected(c: IICase) -> ExpectedClassGroup:
    """Class group and grading of the toric singularity of a case polytope."""
    n, m, i = c.n, c.m, c.index
    if c.case == "ii":
        d = gcd(2 * m, m + n)
        _, a1, a2 = ext_gcd(2 * m, m + n)
        order = 2 * d
        torsion_row = tuple(x % order for x in (a1 + d, -(2 * a1 + a2), a1, a2))
        free_row = (-(m + n) // d, 2 * n // d, -(m + n) // d, 2 * m // d)
        return ExpectedClassGroup(1, (order,), (torsion_row, free_row))
    if c.case == "iii":
        order = i * m
        a1 = pow(n, -1, i)
        return ExpectedClassGroup(0, (order,), (tuple(x % order for x in (1, m * a1, -1)),))
    if c.case == "iv":
        order = 4 * m
        return ExpectedClassGroup(0, (order,), (tuple(x % order for x in (2, 2 * m - 1, -1)),))
    if c.case == "v":
        # |det| of the three vertices is 14; the grading 1/10(1, 1, 3) has age 1/2
        # at k = 1 and is not canonical, so the vertices decide
        return ExpectedClassGroup(0, (14,), ((1, 9, 11),))
    if c.case == "vi":
        # [1, 4, 7] lists the columns last to first
        return ExpectedClassGroup(0, (9,), ((7, 4, 1),))
    raise ValueError("case (i) is the whole Gorenstein family and has no single class group")
