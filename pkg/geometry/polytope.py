# geometry/polytope.py
"""
Exact V-polytopes over Q in small dimension.

A polytope is stored by its extreme points; an H-representation (affine hull
equations plus facet inequalities) is derived on demand and cached. Lattice
points are enumerated fiberwise: the integer box of the first d-1
coordinates is scanned and the last coordinate is read off as an interval.
"""

import logging
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from itertools import combinations, product
from math import ceil, floor
from typing import Dict, List, Optional, Sequence, Tuple

from geometry.exact import (
    RatLike,
    dot,
    integral_multiple,
    lp_feasible,
    nullspace,
    rat,
    row_reduce,
)

logger = logging.getLogger(__name__)

RatPoint = Tuple[Fraction, ...]
IntPoint = Tuple[int, ...]

INTERIOR = "interior"
BOUNDARY = "boundary"
OUTSIDE = "outside"


def as_point(coords: Sequence[RatLike]) -> RatPoint:
    return tuple(rat(c) for c in coords)


def _in_hull_lp(p: RatPoint, points: Sequence[RatPoint]) -> bool:
    """p in conv(points): lambda >= 0, sum lambda = 1, sum lambda v = p."""
    n = len(points)
    d = len(p)
    eqs = [([v[i] for v in points], p[i]) for i in range(d)]
    eqs.append(([1] * n, 1))
    ineqs = [([1 if j == i else 0 for j in range(n)], 0) for i in range(n)]
    return lp_feasible(eqs, ineqs, nvars=n).feasible


def _in_relative_interior_lp(p: RatPoint, points: Sequence[RatPoint]) -> bool:
    """mu_i >= 1, sum mu_i v_i = s p, sum mu_i = s (homogenized strict combination)."""
    n = len(points)
    d = len(p)
    eqs = [([v[i] for v in points] + [-p[i]], 0) for i in range(d)]
    eqs.append(([1] * n + [-1], 0))
    ineqs = [([1 if j == i else 0 for j in range(n + 1)], 1) for i in range(n)]
    return lp_feasible(eqs, ineqs, nvars=n + 1).feasible


@dataclass(frozen=True)
class HalfSpace:
    """normal . x <= bound (normal integral and primitive)."""
    normal: IntPoint
    bound: Fraction


@dataclass(frozen=True)
class VPolytope:
    d: int
    vertices: Tuple[RatPoint, ...]

    @classmethod
    def from_points(cls, points: Sequence[Sequence[RatLike]], d: Optional[int] = None) -> "VPolytope":
        """
        Build a polytope from arbitrary points.

        Args:
            points: generating points, duplicates and redundant points allowed
            d: ambient dimension (taken from the points otherwise)

        Returns:
            VPolytope whose vertices are exactly the extreme points, sorted
        """
        pts = sorted({as_point(p) for p in points})
        if not pts:
            raise ValueError("A polytope needs at least one point")
        dim = d if d is not None else len(pts[0])
        if any(len(p) != dim for p in pts):
            raise ValueError(f"All points must have dimension {dim}")
        extreme = [p for i, p in enumerate(pts) if len(pts) == 1 or not _in_hull_lp(p, pts[:i] + pts[i + 1:])]
        return cls(d=dim, vertices=tuple(extreme))

    # --- H-representation ---------------------------------------------------

    @cached_property
    def _hull(self) -> Tuple[List[Tuple[IntPoint, Fraction]], List[int]]:
        base = self.vertices[0]
        diffs = [[a - b for a, b in zip(v, base)] for v in self.vertices[1:]]
        if diffs:
            _, pivots = row_reduce(diffs)
        else:
            pivots = []
        eqs = []
        if len(pivots) < self.d:
            rows = diffs if diffs else [[Fraction(0)] * self.d]
            for n in nullspace(rows, self.d):
                normal = integral_multiple(n)
                eqs.append((normal, dot(normal, base)))
        return eqs, pivots

    def affine_hull(self) -> List[Tuple[IntPoint, Fraction]]:
        """Equations normal . x = value cutting out the affine hull."""
        return self._hull[0]

    @property
    def dimension(self) -> int:
        return len(self._hull[1])

    @property
    def is_full_dimensional(self) -> bool:
        return self.dimension == self.d

    @cached_property
    def facets(self) -> Tuple[HalfSpace, ...]:
        """Facet inequalities of the polytope inside its affine hull."""
        pivots = self._hull[1]
        k = len(pivots)
        if k == 0:
            return tuple()
        proj = [tuple(v[i] for i in pivots) for v in self.vertices]
        found: Dict[IntPoint, HalfSpace] = {}
        for subset in combinations(range(len(proj)), k):
            rows = [list(proj[i]) + [Fraction(1)] for i in subset]
            ns = nullspace(rows, k + 1)
            if len(ns) != 1:
                continue
            normal_q = ns[0][:k]
            if all(x == 0 for x in normal_q):
                continue
            normal = integral_multiple(normal_q)
            values = [dot(normal, q) for q in proj]
            bound = dot(normal, proj[subset[0]])
            if all(val <= bound for val in values):
                pass
            elif all(val >= bound for val in values):
                normal = tuple(-x for x in normal)
                bound = -bound
            else:
                continue
            lifted = [0] * self.d
            for idx, col in enumerate(pivots):
                lifted[col] = normal[idx]
            key = tuple(lifted)
            if key not in found:
                found[key] = HalfSpace(normal=key, bound=bound)
        return tuple(found[key] for key in sorted(found))

    def constraints(self) -> List[Tuple[IntPoint, Fraction]]:
        """All constraints as normal . x <= bound, equations split in two."""
        out = [(h.normal, h.bound) for h in self.facets]
        for normal, value in self.affine_hull():
            out.append((normal, value))
            out.append((tuple(-x for x in normal), -value))
        return out

    # --- transformations ----------------------------------------------------

    def scale(self, c: RatLike) -> "VPolytope":
        c = rat(c)
        return VPolytope.from_points([[c * x for x in v] for v in self.vertices], self.d)

    def translate(self, w: Sequence[RatLike]) -> "VPolytope":
        w = as_point(w)
        return VPolytope(self.d, tuple(sorted(tuple(a + b for a, b in zip(v, w)) for v in self.vertices)))

    def apply_affine(self, A: Sequence[Sequence[int]], w: Sequence[RatLike]) -> "VPolytope":
        w = as_point(w)
        pts = [tuple(dot(row, v) + wi for row, wi in zip(A, w)) for v in self.vertices]
        return VPolytope.from_points(pts, self.d)

    def bounding_box(self) -> List[Tuple[int, int]]:
        return [
            (ceil(min(v[i] for v in self.vertices)), floor(max(v[i] for v in self.vertices)))
            for i in range(self.d)
        ]

    def is_lattice(self) -> bool:
        return all(x.denominator == 1 for v in self.vertices for x in v)

    def has_vertex(self, p: Sequence[RatLike]) -> bool:
        return as_point(p) in self.vertices


# --- membership and enumeration ---------------------------------------------

def contains(P: VPolytope, p: Sequence[RatLike], method: str = "hrep") -> str:
    """
    Classify a point against a polytope.

    Args:
        P: the polytope
        p: rational point of the same dimension
        method: "hrep" (facet inequalities) or "lp" (convex-combination systems)

    Returns:
        "interior" (relative interior), "boundary" or "outside"
    """
    q = as_point(p)
    if len(q) != P.d:
        raise ValueError(f"Point of dimension {len(q)} tested against a polytope of dimension {P.d}")
    if method == "lp":
        if not _in_hull_lp(q, P.vertices):
            return OUTSIDE
        return INTERIOR if _in_relative_interior_lp(q, P.vertices) else BOUNDARY
    if method != "hrep":
        raise ValueError(f"Unknown containment method: {method}")
    for normal, value in P.affine_hull():
        if dot(normal, q) != value:
            return OUTSIDE
    on_facet = False
    for h in P.facets:
        val = dot(h.normal, q)
        if val > h.bound:
            return OUTSIDE
        if val == h.bound:
            on_facet = True
    return BOUNDARY if on_facet else INTERIOR


def _last_interval(constraints, prefix: Sequence[int], lo: int, hi: int) -> Optional[Tuple[int, int]]:
    for normal, bound in constraints:
        rest = bound - sum(a * x for a, x in zip(normal, prefix))
        c = normal[-1]
        if c == 0:
            if rest < 0:
                return None
        elif c > 0:
            hi = min(hi, floor(Fraction(rest) / c))
        else:
            lo = max(lo, ceil(Fraction(rest) / c))
        if lo > hi:
            return None
    return lo, hi


def lattice_points(P: VPolytope) -> List[IntPoint]:
    """
    All integer points of the closed polytope, in lexicographic order.

    Args:
        P: nonempty polytope

    Returns:
        List of integer tuples
    """
    box = P.bounding_box()
    if any(lo > hi for lo, hi in box):
        return []
    constraints = P.constraints()
    points: List[IntPoint] = []
    head = [range(lo, hi + 1) for lo, hi in box[:-1]]
    last_lo, last_hi = box[-1]
    for prefix in product(*head):
        interval = _last_interval(constraints, prefix, last_lo, last_hi)
        if interval is None:
            continue
        for x in range(interval[0], interval[1] + 1):
            points.append(tuple(prefix) + (x,))
    return points


def k_fold_points(P: VPolytope, k: int) -> List[IntPoint]:
    """P intersected with k Z^d, via the lattice points of P/k."""
    if k < 1:
        raise ValueError("k must be a positive integer")
    if k == 1:
        return lattice_points(P)
    return [tuple(k * x for x in p) for p in lattice_points(P.scale(Fraction(1, k)))]


def is_k_empty(P: VPolytope, k: int) -> bool:
    """Every k-fold lattice point of P is a vertex of P."""
    return all(P.has_vertex(p) for p in k_fold_points(P, k))


def k_empty_witness(P: VPolytope, k: int) -> Optional[IntPoint]:
    return next((p for p in k_fold_points(P, k) if not P.has_vertex(p)), None)


# --- Q-Gorenstein polytopes -------------------------------------------------

@dataclass(frozen=True)
class GorensteinData:
    alpha: IntPoint
    index: int


@dataclass(frozen=True)
class PolytopeVerdict:
    holds: bool
    witness: Optional[IntPoint] = None


def q_gorenstein(P: VPolytope) -> Optional[GorensteinData]:
    """
    Integral covector alpha constant and positive on the nonzero vertices.

    Args:
        P: full-dimensional polytope with the origin as a vertex

    Returns:
        GorensteinData with the minimal index, or None if no such alpha exists
    """
    origin = tuple(Fraction(0) for _ in range(P.d))
    if origin not in P.vertices:
        raise ValueError("q_gorenstein() needs the origin as a vertex")
    if not P.is_full_dimensional:
        raise ValueError("q_gorenstein() needs a full-dimensional polytope")
    others = [v for v in P.vertices if v != origin]
    rows = [list(v) + [Fraction(-1)] for v in others]
    ns = nullspace(rows, P.d + 1)
    if len(ns) != 1:
        return None
    alpha_q, c = ns[0][:-1], ns[0][-1]
    if c == 0:
        return None
    direction = integral_multiple(alpha_q)
    value = dot(direction, others[0])
    if value < 0:
        direction = tuple(-x for x in direction)
        value = -value
    alpha = tuple(x * value.denominator for x in direction)
    return GorensteinData(alpha=alpha, index=value.numerator)


def _require_gorenstein(P: VPolytope) -> GorensteinData:
    data = q_gorenstein(P)
    if data is None:
        raise ValueError("Polytope is not Q-Gorenstein")
    return data


def is_canonical_polytope(P: VPolytope) -> PolytopeVerdict:
    """Every nonzero lattice point p of P has <alpha, p> equal to the index."""
    data = _require_gorenstein(P)
    for p in lattice_points(P):
        if any(p) and dot(data.alpha, p) != data.index:
            return PolytopeVerdict(False, p)
    return PolytopeVerdict(True)


def is_terminal_polytope(P: VPolytope) -> PolytopeVerdict:
    """All lattice points of P are vertices."""
    _require_gorenstein(P)
    for p in lattice_points(P):
        if not P.has_vertex(p):
            return PolytopeVerdict(False, p)
    return PolytopeVerdict(True)


def quadrangle_polytope(a: int, b: int, index: int) -> VPolytope:
    """conv(0, (a,b,i), (a+1,b,i), (a,b+1,i), (a+1,b+1,i))."""
    return VPolytope.from_points(
        [(0, 0, 0), (a, b, index), (a + 1, b, index), (a, b + 1, index), (a + 1, b + 1, index)]
    )
