# singularities/coxring.py
"""
Class group, degree matrix and Cox ring presentation of X(P).

K = Z^(n+m) / im(P*) is read off the Smith normal form V * P* * W = S of the
transpose: rows of V with an elementary divisor > 1 give the torsion
coordinates (reduced mod the divisor), rows beyond the rank give the free
coordinates.
"""

import logging
from dataclasses import dataclass
from itertools import product
from math import gcd
from typing import List, Optional, Sequence, Tuple, Union

from geometry.exact import lcm_of, snf, transpose
from geometry.lemmas import IICase, ii_vertices
from singularities.cplxone import DefiningMatrix

logger = logging.getLogger(__name__)

Element = Tuple[int, ...]
MatrixLike = Union[DefiningMatrix, Sequence[Sequence[int]]]


@dataclass(frozen=True)
class ClassGroup:
    """Z^free_rank + Z/t_1 + ... + Z/t_s; elements list torsion coordinates first."""
    free_rank: int
    torsion: Tuple[int, ...]

    @property
    def is_finite(self) -> bool:
        return self.free_rank == 0

    @property
    def order(self) -> Optional[int]:
        if not self.is_finite:
            return None
        result = 1
        for t in self.torsion:
            result *= t
        return result

    def reduce(self, element: Sequence[int]) -> Element:
        if len(element) != len(self.torsion) + self.free_rank:
            raise ValueError(f"Element {tuple(element)} does not fit {self}")
        tors = tuple(x % t for x, t in zip(element, self.torsion))
        return tors + tuple(element[len(self.torsion):])

    def describe(self) -> str:
        parts = [f"Z/{t}Z" for t in self.torsion]
        if self.free_rank:
            parts.insert(0, "Z" if self.free_rank == 1 else f"Z^{self.free_rank}")
        return " + ".join(parts) if parts else "0"


@dataclass(frozen=True)
class DegreeMatrix:
    rows: Tuple[Tuple[int, ...], ...]
    group: ClassGroup

    @property
    def ncols(self) -> int:
        return len(self.rows[0]) if self.rows else 0

    def degree(self, exponents: Sequence[int]) -> Element:
        """Q applied to an exponent vector."""
        raw = [sum(q * e for q, e in zip(row, exponents)) for row in self.rows]
        return self.group.reduce(raw)

    def column(self, j: int) -> Element:
        return tuple(row[j] for row in self.rows)


def _columns(P: MatrixLike) -> List[Tuple[int, ...]]:
    if isinstance(P, DefiningMatrix):
        return P.columns()
    return [tuple(int(x) for x in col) for col in transpose(P)]


def class_group(P: MatrixLike) -> Tuple[ClassGroup, DegreeMatrix]:
    """
    Class group and degree matrix of the columns of P.

    Args:
        P: DefiningMatrix, or a plain integer matrix whose columns are the ray generators

    Returns:
        (ClassGroup, DegreeMatrix)
    """
    p_star = _columns(P)
    decomp = snf(p_star)
    nonzero = [s for s in decomp.divisors if s]
    rk = len(nonzero)
    torsion_idx = [t for t, s in enumerate(nonzero) if s > 1]
    torsion = tuple(nonzero[t] for t in torsion_idx)
    free_idx = list(range(rk, len(p_star)))
    group = ClassGroup(free_rank=len(free_idx), torsion=torsion)
    rows = [tuple(x % nonzero[t] for x in decomp.V[t]) for t in torsion_idx]
    rows += [tuple(decomp.V[t]) for t in free_idx]
    logger.debug("class group %s", group.describe())
    return group, DegreeMatrix(tuple(rows), group)


def order_in_class_group(element: Sequence[int], group: ClassGroup) -> Optional[int]:
    """Order of an element; None when it has infinite order."""
    element = group.reduce(element)
    if any(element[len(group.torsion):]):
        return None
    return lcm_of([t // gcd(x, t) for x, t in zip(element, group.torsion)])


def equivalent_gradings(Q1: DegreeMatrix, Q2: DegreeMatrix, group: Optional[ClassGroup] = None) -> bool:
    """
    Whether Q2 = phi o Q1 for an automorphism phi of the class group of the form
    free row -> +-free row, torsion row -> u * torsion row + sum c_f * free row_f
    with u a unit mod the torsion order. Torsion rows are matched one by one.
    """
    group = group or Q1.group
    if Q1.group != group or Q2.group != group or Q1.ncols != Q2.ncols:
        return False
    s = len(group.torsion)
    free1, free2 = Q1.rows[s:], Q2.rows[s:]
    for f1, f2 in zip(free1, free2):
        if f2 != f1 and f2 != tuple(-x for x in f1):
            return False
    for t, n in enumerate(group.torsion):
        target = tuple(x % n for x in Q2.rows[t])
        if not _torsion_row_matches(Q1.rows[t], target, free1, n):
            return False
    return True


def _torsion_row_matches(row, target, free_rows, n: int) -> bool:
    units = [u for u in range(1, n) if gcd(u, n) == 1] or [1]
    for u in units:
        for shifts in product(range(n), repeat=len(free_rows)):
            cand = tuple(
                (u * x + sum(c * f[j] for c, f in zip(shifts, free_rows))) % n
                for j, x in enumerate(row)
            )
            if cand == target:
                return True
    return False


# --- Cox ring ---------------------------------------------------------------

@dataclass(frozen=True)
class Relation:
    """sum of coefficient * monomial, exponents indexed like the columns of P."""
    terms: Tuple[Tuple[int, Tuple[int, ...]], ...]

    def render(self, labels: Sequence[str]) -> str:
        out = []
        for coeff, exps in self.terms:
            mono = "".join(
                lab if e == 1 else f"{lab}^{e}" for lab, e in zip(labels, exps) if e
            )
            out.append(mono if coeff == 1 else f"{coeff}*{mono}")
        return " + ".join(out)


@dataclass(frozen=True)
class CoxPresentation:
    variables: Tuple[str, ...]
    relations: Tuple[Relation, ...]

    def render(self) -> List[str]:
        return [g.render(self.variables) for g in self.relations]


def _block_monomial(P: DefiningMatrix, i: int) -> Tuple[int, ...]:
    exps = [0] * (P.n + P.m)
    pos = sum(b.n for b in P.blocks[:i])
    for j, l in enumerate(P.blocks[i].l):
        exps[pos + j] = l
    return tuple(exps)


def cox_presentation(P: MatrixLike) -> CoxPresentation:
    """Variables T_ij, S_k and the trinomials (i+1) T_i^l_i + T_(i+1)^l_(i+1) + T_(i+2)^l_(i+2)."""
    if not isinstance(P, DefiningMatrix):
        cols = _columns(P)
        return CoxPresentation(tuple(f"T{j + 1}" for j in range(len(cols))), ())
    relations = tuple(
        Relation(
            (
                (i + 1, _block_monomial(P, i)),
                (1, _block_monomial(P, i + 1)),
                (1, _block_monomial(P, i + 2)),
            )
        )
        for i in range(P.r - 1)
    )
    return CoxPresentation(tuple(P.column_labels()), relations)


def is_homogeneous(relation: Relation, Q: DegreeMatrix) -> bool:
    degrees = {Q.degree(exps) for _, exps in relation.terms}
    return len(degrees) == 1


@dataclass(frozen=True)
class AnticanonicalClass:
    """The canonical class K_X in class group coordinates."""
    element: Element
    group: ClassGroup

    @property
    def order(self) -> Optional[int]:
        return order_in_class_group(self.element, self.group)


def anticanonical_class(P: MatrixLike, Q: Optional[DegreeMatrix] = None) -> AnticanonicalClass:
    """sum_i deg(g_i) - Q(e_Sigma)."""
    if Q is None:
        _, Q = class_group(P)
    cox = cox_presentation(P)
    total = [0] * len(Q.rows)
    for g in cox.relations:
        deg = Q.degree(g.terms[0][1])
        total = [a + b for a, b in zip(total, deg)]
    e_sigma = Q.degree([1] * Q.ncols)
    element = Q.group.reduce([a - b for a, b in zip(total, e_sigma)])
    return AnticanonicalClass(element, Q.group)


def toric_matrix(c: IICase) -> List[List[int]]:
    """3 x r matrix whose columns are the nonzero vertices of a case polytope."""
    return transpose(ii_vertices(c))
