# geometry/kempty.py
"""
k-empty lattice triangles.

Covers the invariant a_P, the k-affine unimodular group Aff_k, the standard
form of a k-empty triangle with a k-fold vertex, Farey strips and spikes,
and the enumeration of sporadic minimal triangles in standard form.
"""

import logging
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from itertools import permutations
from math import gcd
from typing import List, Optional, Sequence, Tuple

from geometry.exact import ext_gcd, mat_vec
from geometry.polytope import VPolytope, is_k_empty

logger = logging.getLogger(__name__)

Point = Tuple[int, int]

STRIP_RULES = ("apex", "kfold")


def _in_kz2(p: Sequence[int], k: int) -> bool:
    return p[0] % k == 0 and p[1] % k == 0


def _sub(u: Sequence[int], v: Sequence[int]) -> Point:
    return (u[0] - v[0], u[1] - v[1])


def _cross(u: Sequence[int], v: Sequence[int]) -> int:
    return u[0] * v[1] - u[1] * v[0]


@dataclass(frozen=True)
class LatticeTriangle:
    v0: Point
    v1: Point
    v2: Point

    def __post_init__(self):
        for name in ("v0", "v1", "v2"):
            p = getattr(self, name)
            if len(p) != 2 or any(not isinstance(c, int) for c in p):
                raise ValueError(f"{name} must be an integer 2-point, got {p!r}")
            object.__setattr__(self, name, tuple(p))
        if len({self.v0, self.v1, self.v2}) < 3:
            raise ValueError("Triangle vertices must be pairwise distinct")
        if _cross(_sub(self.v1, self.v0), _sub(self.v2, self.v0)) == 0:
            raise ValueError("Triangle vertices are collinear")

    @classmethod
    def from_points(cls, points: Sequence[Sequence[int]]) -> "LatticeTriangle":
        if len(points) != 3:
            raise ValueError(f"A triangle needs exactly three vertices, got {len(points)}")
        return cls(*(tuple(int(c) for c in p) for p in points))

    @property
    def vertices(self) -> Tuple[Point, Point, Point]:
        return (self.v0, self.v1, self.v2)

    def polytope(self) -> VPolytope:
        return VPolytope.from_points(self.vertices)

    def k_fold_vertices(self, k: int) -> List[Point]:
        return [v for v in self.vertices if _in_kz2(v, k)]


@dataclass(frozen=True)
class AffK:
    """T(v) = A v + w with A in GL_2(Z) and w in k Z^2."""
    A: Tuple[Tuple[int, int], Tuple[int, int]]
    w: Point
    k: int

    def __post_init__(self):
        object.__setattr__(self, "A", tuple(tuple(row) for row in self.A))
        object.__setattr__(self, "w", tuple(self.w))
        if self.k < 1:
            raise ValueError("k must be a positive integer")
        (a, b), (c, d) = self.A
        if abs(a * d - b * c) != 1:
            raise ValueError(f"Matrix {self.A} is not unimodular")
        if not _in_kz2(self.w, self.k):
            raise ValueError(f"Translation {self.w} is not in {self.k}Z^2")

    def __call__(self, v: Sequence[int]) -> Point:
        x, y = mat_vec(self.A, v)
        return (x + self.w[0], y + self.w[1])

    def apply(self, S: LatticeTriangle) -> LatticeTriangle:
        return LatticeTriangle(self(S.v0), self(S.v1), self(S.v2))

    def compose(self, other: "AffK") -> "AffK":
        """self after other."""
        (a, b), (c, d) = self.A
        (e, f), (g, h) = other.A
        A = ((a * e + b * g, a * f + b * h), (c * e + d * g, c * f + d * h))
        return AffK(A, self(other.w), self.k)


def apply_affk(T: AffK, S: LatticeTriangle) -> LatticeTriangle:
    return T.apply(S)


def random_affk(k: int, rng: random.Random, steps: int = 6, spread: int = 3) -> AffK:
    """Random element of Aff_k as a product of elementary matrices and a k-fold shift."""
    A = ((1, 0), (0, 1))
    for _ in range(steps):
        c = rng.randint(-spread, spread)
        E = ((1, c), (0, 1)) if rng.random() < 0.5 else ((1, 0), (c, 1))
        A = (
            (E[0][0] * A[0][0] + E[0][1] * A[1][0], E[0][0] * A[0][1] + E[0][1] * A[1][1]),
            (E[1][0] * A[0][0] + E[1][1] * A[1][0], E[1][0] * A[0][1] + E[1][1] * A[1][1]),
        )
    if rng.random() < 0.5:
        A = (A[1], A[0])
    w = (k * rng.randint(-spread, spread), k * rng.randint(-spread, spread))
    return AffK(A, w, k)


# --- a_P and standard form --------------------------------------------------

def _edges(P: VPolytope) -> List[Tuple[Point, Point]]:
    verts = [tuple(int(c) for c in v) for v in P.vertices]
    if len(verts) == 2:
        return [(verts[0], verts[1])]
    edges = []
    for h in P.facets:
        on = [v for v, q in zip(verts, P.vertices) if sum(a * x for a, x in zip(h.normal, q)) == h.bound]
        edges.append((on[0], on[1]))
    return edges


def a_value(P, k: int) -> int:
    """
    a_P: one more than the minimal number of interior lattice points on an
    edge of P with a vertex in kZ^2.

    Args:
        P: LatticeTriangle, VPolytope or a sequence of integer 2-points
        k: positive integer

    Returns:
        Positive integer
    """
    if isinstance(P, LatticeTriangle):
        P = P.polytope()
    elif not isinstance(P, VPolytope):
        P = VPolytope.from_points(P)
    if P.d != 2 or not P.is_lattice():
        raise ValueError("a_value() needs a lattice polygon")
    counts = [
        gcd(v[0] - u[0], v[1] - u[1]) - 1
        for u, v in _edges(P)
        if _in_kz2(u, k) or _in_kz2(v, k)
    ]
    if not counts:
        raise ValueError(f"No vertex of the polygon lies in {k}Z^2")
    return min(counts) + 1


@dataclass(frozen=True)
class StandardTriangle:
    """Delta(a, x, y) = conv((0,0), (0,a), (x,y)) with 0 <= y < x."""
    a: int
    x: int
    y: int
    k: int

    def __post_init__(self):
        if self.a < 1 or self.k < 1:
            raise ValueError("a and k must be positive")
        if not 0 <= self.y < self.x:
            raise ValueError(f"Apex ({self.x}, {self.y}) is not in 0 <= y < x")

    @property
    def apex(self) -> Point:
        return (self.x, self.y)

    @property
    def is_minimal(self) -> bool:
        return self.a == 1

    def triangle(self) -> LatticeTriangle:
        return LatticeTriangle((0, 0), (0, self.a), (self.x, self.y))

    def satisfies_conditions(self) -> bool:
        return standard_conditions_hold(self.a, self.x, self.y, self.k)


def standard_conditions_hold(a: int, x: int, y: int, k: int) -> bool:
    """The two tie-break conditions on Delta(a, x, y)."""
    if gcd(x, y) != a:
        return True
    if not _in_kz2((x, y), k):
        return all(z % a != 0 or (a * a - z * y) % (a * x) != 0 for z in range(1, y))
    return all(z % a != 0 or (a * (z + y) - z * y) % (a * x) != 0 for z in range(1, y))


def _place(z: Point, v1: Point, v2: Point, a: int, k: int) -> Tuple[Point, AffK]:
    """Transform sending z -> 0, v1 -> (0, a) and v2 into 0 <= y < x."""
    p, q = (v1[0] - z[0]) // a, (v1[1] - z[1]) // a
    _, s, t = ext_gcd(p, q)
    d = _sub(v2, z)
    row = (-q, p)
    if row[0] * d[0] + row[1] * d[1] < 0:
        row = (q, -p)
    x = row[0] * d[0] + row[1] * d[1]
    y = s * d[0] + t * d[1]
    c = -(y // x)
    A = ((row[0], row[1]), (s + c * row[0], t + c * row[1]))
    shift = mat_vec(A, z)
    T = AffK(A, (-shift[0], -shift[1]), k)
    return T(v2), T


def standard_form(S: LatticeTriangle, k: int) -> Tuple[StandardTriangle, AffK]:
    """
    Standard form of a k-empty triangle with a vertex in kZ^2.

    Every ordered pair (z, v1) with z a k-fold vertex and gcd(v1 - z) = a_S
    yields a candidate Delta(a_S, x, y); the candidate with the smallest y
    is the standard form.

    Args:
        S: lattice triangle
        k: positive integer

    Returns:
        (StandardTriangle, AffK) with T(S) equal to the standard triangle
    """
    if not S.k_fold_vertices(k):
        raise ValueError(f"No vertex of the triangle lies in {k}Z^2")
    if not is_k_empty(S.polytope(), k):
        raise ValueError(f"Triangle {S.vertices} is not {k}-empty")
    a = a_value(S, k)
    best: Optional[Tuple[Point, AffK]] = None
    for z in S.k_fold_vertices(k):
        others = [v for v in S.vertices if v != z]
        for v1, v2 in (others, others[::-1]):
            diff = _sub(v1, z)
            if gcd(diff[0], diff[1]) != a:
                continue
            apex, T = _place(z, v1, v2, a, k)
            logger.debug("standard_form candidate z=%s v1=%s -> apex %s", z, v1, apex)
            if best is None or apex[1] < best[0][1]:
                best = (apex, T)
    apex, T = best
    return StandardTriangle(a, apex[0], apex[1], k), T


def lattice_equivalent(S1: LatticeTriangle, S2: LatticeTriangle, k: int = 1) -> Optional[AffK]:
    """An element of Aff_k mapping S1 onto S2, or None."""
    u0, u1, u2 = S1.vertices
    U = (_sub(u1, u0), _sub(u2, u0))
    detU = _cross(U[0], U[1])
    for w0, w1, w2 in permutations(S2.vertices):
        W = (_sub(w1, w0), _sub(w2, w0))
        if abs(_cross(W[0], W[1])) != abs(detU):
            continue
        # A = W U^{-1} with columns of U and W the edge vectors
        inv = ((U[1][1], -U[1][0]), (-U[0][1], U[0][0]))
        entries = [
            [W[0][r] * inv[0][c] + W[1][r] * inv[1][c] for c in range(2)]
            for r in range(2)
        ]
        if any(e % detU for row in entries for e in row):
            continue
        A = tuple(tuple(e // detU for e in row) for row in entries)
        if abs(A[0][0] * A[1][1] - A[0][1] * A[1][0]) != 1:
            continue
        Au0 = mat_vec(A, u0)
        w = (w0[0] - Au0[0], w0[1] - Au0[1])
        if _in_kz2(w, k):
            return AffK(A, w, k)
    return None


def k_equivalent(S1: LatticeTriangle, S2: LatticeTriangle, k: int) -> bool:
    """
    Whether S2 lies in the Aff_k-orbit of S1.

    Standard forms are compared when both triangles are k-empty with a k-fold
    vertex; otherwise the vertex bijections are searched directly.
    """
    def has_form(S):
        return bool(S.k_fold_vertices(k)) and is_k_empty(S.polytope(), k)

    if has_form(S1) and has_form(S2):
        return standard_form(S1, k)[0] == standard_form(S2, k)[0]
    logger.debug("k_equivalent: falling back to direct search for k=%d", k)
    return lattice_equivalent(S1, S2, k) is not None


def is_k_empty_apex(x: int, y: int, k: int) -> bool:
    """k-emptiness of conv((0,0), (0,1), (x,y)) for x >= 1, without enumeration."""
    if x < 1:
        raise ValueError("is_k_empty_apex() needs x >= 1")
    a = 1
    while k * a < x:
        if k * ((-a * y) % x) + k * a <= x:
            return False
        a += 1
    return True


# --- Farey strips -----------------------------------------------------------

@dataclass(frozen=True, order=True)
class FareyNumber:
    f1: int
    f2: int

    def __post_init__(self):
        if not 0 <= self.f1 < self.f2 or gcd(self.f1, self.f2) != 1:
            raise ValueError(f"{self.f1}/{self.f2} is not a reduced fraction in [0, 1)")

    @property
    def value(self) -> Fraction:
        return Fraction(self.f1, self.f2)

    def __str__(self) -> str:
        return f"{self.f1}/{self.f2}"


@dataclass(frozen=True)
class FareyStrip:
    f: FareyNumber
    k: int

    def __post_init__(self):
        if self.f.f2 > self.k:
            raise ValueError(f"{self.f} is not a Farey number of order {self.k}")

    @property
    def upper_strict(self) -> bool:
        return self.f.f2 == self.k

    def level(self, p: Sequence[int]) -> int:
        return self.f.f2 * p[1] - self.f.f1 * p[0]

    def contains_point(self, p: Sequence[int]) -> bool:
        val = self.level(p)
        upper = val < self.k if self.upper_strict else val <= self.k
        return 0 < val and upper


def farey_sequence(k: int) -> List[FareyNumber]:
    if k < 1:
        raise ValueError("k must be a positive integer")
    fracs = [FareyNumber(f1, f2) for f2 in range(1, k + 1) for f1 in range(f2) if gcd(f1, f2) == 1]
    return sorted(fracs, key=lambda f: f.value)


def farey_strips(k: int) -> List[FareyStrip]:
    return [FareyStrip(f, k) for f in farey_sequence(k)]


def strip_contains(S: LatticeTriangle, F: FareyStrip, rule: str = "apex") -> bool:
    """
    Whether S, minus its exempt vertices, lies in the Farey strip F.

    rule "apex" reads S as conv((0,0),(0,1),apex) and tests only the apex.
    rule "kfold" exempts the vertices in kZ^2 from the open lower bound and the
    strict upper bound.
    """
    if rule == "apex":
        fixed = {(0, 0), (0, 1)}
        rest = [v for v in S.vertices if v not in fixed]
        if len(rest) != 1:
            raise ValueError("rule 'apex' needs a triangle with vertices (0,0) and (0,1)")
        return F.contains_point(rest[0])
    if rule != "kfold":
        raise ValueError(f"Unknown strip rule: {rule}")
    k = F.k
    zeros = 0
    for v in S.vertices:
        val = F.level(v)
        exempt = _in_kz2(v, k)
        if val < 0 or val > k:
            return False
        if val == 0:
            if not exempt:
                return False
            zeros += 1
        if F.upper_strict and val == k and not exempt:
            return False
    return zeros <= 1


def apex_strip(x: int, y: int, k: int, rule: str = "apex") -> Optional[FareyStrip]:
    """First strip of order k containing conv((0,0),(0,1),(x,y)), if any."""
    S = LatticeTriangle((0, 0), (0, 1), (x, y))
    return next((F for F in farey_strips(k) if strip_contains(S, F, rule)), None)


# --- spikes -----------------------------------------------------------------

@dataclass(frozen=True)
class Spike:
    f: FareyNumber
    k: int
    i: int
    vertices: Tuple[Tuple[Fraction, Fraction], ...]

    @property
    def area(self) -> Fraction:
        return spike_area(self.k, self.f, self.i)


def _spike_pre(k: int, f: FareyNumber, i: int) -> None:
    if f.f2 == k:
        raise ValueError("Spikes are attached only to strips with f2 != k")
    if i <= k - f.f2:
        raise ValueError(f"Spike index must exceed k - f2 = {k - f.f2}")


def spike_area(k: int, f: FareyNumber, i: int) -> Fraction:
    _spike_pre(k, f, i)
    return Fraction(1, 2) * (Fraction(i * k * k, i - k + f.f2) - k * k)


def spike_vertices(k: int, f: FareyNumber, i: int) -> Spike:
    """Vertices of the spike with index i attached to the strip F_{k,f}."""
    _spike_pre(k, f, i)
    slope = Fraction(f.f1, f.f2)
    off = Fraction(k, f.f2)
    den = i - k + f.f2
    verts = (
        (Fraction(i * k), slope * i * k + off),
        (Fraction((i + f.f2) * k), slope * (i + f.f2) * k + off),
        (
            Fraction((i + f.f2) * i * k, den),
            (slope * (i + f.f2) * i * k + i * off) / den,
        ),
    )
    return Spike(f=f, k=k, i=i, vertices=verts)


def spike_area_below_one(k: int, f: FareyNumber, i: int) -> bool:
    """Closed-form test of area < 1."""
    _spike_pre(k, f, i)
    return 2 * i > k ** 3 - f.f2 * k * k + 2 * k - 2 * f.f2


# --- sporadic enumeration ---------------------------------------------------

def sporadic_bound(k: int) -> int:
    if k < 1:
        raise ValueError("k must be a positive integer")
    return (k * k - 1) * k - 1


def _sporadic_column(x: int, k: int, rule: str) -> List[Tuple[int, int]]:
    strips = farey_strips(k)
    found = []
    for y in range(x):
        if not standard_conditions_hold(1, x, y, k):
            continue
        if not is_k_empty_apex(x, y, k):
            continue
        S = LatticeTriangle((0, 0), (0, 1), (x, y))
        if any(strip_contains(S, F, rule) for F in strips):
            continue
        found.append((x, y))
    return found


def enumerate_sporadic_minimal(k: int, rule: str = "apex", workers: int = 1) -> List[StandardTriangle]:
    """
    Minimal k-empty triangles in standard form outside every Farey strip.

    Args:
        k: positive integer
        rule: strip exemption rule, "apex" or "kfold"
        workers: process workers used for the apex columns

    Returns:
        StandardTriangle list sorted by apex (x, y)
    """
    if rule not in STRIP_RULES:
        raise ValueError(f"Unknown strip rule: {rule}")
    bound = sporadic_bound(k)
    columns = range(1, bound + 1)
    if workers > 1 and bound > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_sporadic_column, columns, [k] * bound, [rule] * bound))
    else:
        results = [_sporadic_column(x, k, rule) for x in columns]
    apexes = sorted(p for col in results for p in col)
    logger.info("k=%d: %d sporadic minimal triangles (rule=%s)", k, len(apexes), rule)
    return [StandardTriangle(1, x, y, k) for x, y in apexes]
