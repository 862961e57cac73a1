# geometry/exact.py
"""
Exact integer and rational linear algebra.

Python ints are arbitrary precision and ``fractions.Fraction`` is always
normalized (positive denominator, reduced), so the BigInt/Rat layer is the
standard one. This module adds what the rest of the package needs on top:
Smith normal form with transforms, Gaussian elimination over Q, and a small
exact simplex that decides feasibility of linear systems.
"""

import logging
from dataclasses import dataclass
from fractions import Fraction
from math import gcd
from typing import List, Optional, Sequence, Tuple, Union

logger = logging.getLogger(__name__)

IntMat = List[List[int]]
RatLike = Union[int, Fraction, str]


def rat(value: RatLike) -> Fraction:
    """Parse an int, Fraction or decimal/"p/q" string into a Fraction."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise ValueError(f"Not a rational number: {value!r}")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        text = value.strip()
        if not text:
            raise ValueError("Empty string is not a rational number")
        try:
            if "/" in text:
                num, den = text.split("/", 1)
                if int(den) == 0:
                    raise ValueError(f"Zero denominator in {value!r}")
                return Fraction(int(num), int(den))
            return Fraction(int(text))
        except ValueError as e:
            raise ValueError(f"Not a rational number: {value!r} ({e})")
    raise ValueError(f"Not a rational number: {value!r}")


def integer(value: RatLike) -> int:
    """Parse a value that must be an integer."""
    q = rat(value)
    if q.denominator != 1:
        raise ValueError(f"Expected an integer, got {format_rat(q)}")
    return q.numerator


def format_rat(value: Union[int, Fraction]) -> str:
    """Serialize as "p" or "p/q"."""
    q = Fraction(value)
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


def ext_gcd(a: int, b: int) -> Tuple[int, int, int]:
    """
    Extended Euclid.

    Returns:
        (g, s, t) with s*a + t*b = g = gcd(a, b) >= 0
    """
    old_r, r = a, b
    old_s, s = 1, 0
    old_t, t = 0, 1
    while r != 0:
        q = old_r // r
        old_r, r = r, old_r - q * r
        old_s, s = s, old_s - q * s
        old_t, t = t, old_t - q * t
    if old_r < 0:
        old_r, old_s, old_t = -old_r, -old_s, -old_t
    return old_r, old_s, old_t


def vector_gcd(v: Sequence[int]) -> int:
    g = 0
    for x in v:
        g = gcd(g, x)
    return g


def primitive(v: Sequence[int]) -> Tuple[int, ...]:
    """
    Divide an integer vector by the gcd of its entries.

    Args:
        v: nonzero integer vector

    Returns:
        The primitive vector on the same ray (signs preserved)
    """
    g = vector_gcd(v)
    if g == 0:
        raise ValueError("primitive() of the zero vector")
    return tuple(x // g for x in v)


def is_primitive(v: Sequence[int]) -> bool:
    return vector_gcd(v) == 1


def lcm_of(values: Sequence[int]) -> int:
    result = 1
    for x in values:
        result = result * x // gcd(result, x)
    return result


def integral_multiple(v: Sequence[Fraction]) -> Tuple[int, ...]:
    """Smallest positive multiple of a rational vector that is integral and primitive."""
    den = lcm_of([Fraction(x).denominator for x in v])
    return primitive([int(Fraction(x) * den) for x in v])


# --- matrices ---------------------------------------------------------------

def identity(n: int) -> IntMat:
    return [[1 if i == j else 0 for j in range(n)] for i in range(n)]


def transpose(M: Sequence[Sequence]) -> List[list]:
    if not M:
        return []
    return [list(col) for col in zip(*M)]


def mat_mul(A: Sequence[Sequence], B: Sequence[Sequence]) -> List[list]:
    Bt = transpose(B)
    return [[sum(a * b for a, b in zip(row, col)) for col in Bt] for row in A]


def mat_vec(A: Sequence[Sequence], v: Sequence) -> List:
    return [sum(a * x for a, x in zip(row, v)) for row in A]


def dot(u: Sequence, v: Sequence):
    return sum(a * b for a, b in zip(u, v))


def row_reduce(rows: Sequence[Sequence[RatLike]]) -> Tuple[List[List[Fraction]], List[int]]:
    """
    Reduced row echelon form over Q.

    Returns:
        (rref rows without zero rows, pivot column indices)
    """
    A = [[rat(x) for x in row] for row in rows]
    if not A:
        return [], []
    ncols = len(A[0])
    pivots: List[int] = []
    r = 0
    for c in range(ncols):
        pivot_row = next((i for i in range(r, len(A)) if A[i][c] != 0), None)
        if pivot_row is None:
            continue
        A[r], A[pivot_row] = A[pivot_row], A[r]
        p = A[r][c]
        A[r] = [x / p for x in A[r]]
        for i in range(len(A)):
            if i != r and A[i][c] != 0:
                f = A[i][c]
                A[i] = [x - f * y for x, y in zip(A[i], A[r])]
        pivots.append(c)
        r += 1
        if r == len(A):
            break
    return A[:r], pivots


def rank(rows: Sequence[Sequence[RatLike]]) -> int:
    return len(row_reduce(rows)[1])


def nullspace(rows: Sequence[Sequence[RatLike]], ncols: Optional[int] = None) -> List[List[Fraction]]:
    """Basis of {x : rows . x = 0} over Q, one vector per free column."""
    if ncols is None:
        if not rows:
            raise ValueError("nullspace() needs ncols for an empty system")
        ncols = len(rows[0])
    R, pivots = row_reduce(rows) if rows else ([], [])
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for f in free:
        x = [Fraction(0)] * ncols
        x[f] = Fraction(1)
        for row, p in zip(R, pivots):
            x[p] = -row[f]
        basis.append(x)
    return basis


def det(M: Sequence[Sequence[RatLike]]) -> Fraction:
    """Determinant over Q by elimination."""
    A = [[rat(x) for x in row] for row in M]
    n = len(A)
    if any(len(row) != n for row in A):
        raise ValueError("det() needs a square matrix")
    result = Fraction(1)
    for c in range(n):
        p = next((i for i in range(c, n) if A[i][c] != 0), None)
        if p is None:
            return Fraction(0)
        if p != c:
            A[c], A[p] = A[p], A[c]
            result = -result
        result *= A[c][c]
        for i in range(c + 1, n):
            if A[i][c] != 0:
                f = A[i][c] / A[c][c]
                A[i] = [x - f * y for x, y in zip(A[i], A[c])]
    return result


def solve_unique(rows: Sequence[Sequence[RatLike]], rhs: Sequence[RatLike]) -> Optional[List[Fraction]]:
    """Unique solution of a square or overdetermined system, or None."""
    aug = [list(row) + [b] for row, b in zip(rows, rhs)]
    R, pivots = row_reduce(aug)
    n = len(rows[0])
    if n in pivots or len(pivots) < n:
        return None
    x = [Fraction(0)] * n
    for row, p in zip(R, pivots):
        x[p] = row[-1]
    return x


# --- Smith normal form ------------------------------------------------------

@dataclass(frozen=True)
class SmithDecomp:
    """V * M * W = S with V, W unimodular and S diagonal with a divisibility chain."""
    S: Tuple[Tuple[int, ...], ...]
    V: Tuple[Tuple[int, ...], ...]
    W: Tuple[Tuple[int, ...], ...]
    divisors: Tuple[int, ...]


def _pick_pivot(A: IntMat, t: int) -> Optional[Tuple[int, int]]:
    best = None
    for i in range(t, len(A)):
        for j in range(t, len(A[0])):
            x = abs(A[i][j])
            if x and (best is None or x < best[0]):
                best = (x, i, j)
    return None if best is None else (best[1], best[2])


def snf(M: Sequence[Sequence[int]]) -> SmithDecomp:
    """
    Smith normal form with transforms.

    Pivot rule: nonzero entry of minimal absolute value in the active
    submatrix, ties broken row-major. The output is a pure function of M.

    Args:
        M: nonempty integer matrix (list of rows)

    Returns:
        SmithDecomp with V*M*W = S
    """
    if not M or not M[0]:
        raise ValueError("snf() of an empty matrix")
    A = [[int(x) for x in row] for row in M]
    m, n = len(A), len(A[0])
    if any(len(row) != n for row in A):
        raise ValueError("snf() needs a rectangular matrix")
    V = identity(m)
    W = identity(n)

    def swap_rows(i, k):
        A[i], A[k] = A[k], A[i]
        V[i], V[k] = V[k], V[i]

    def swap_cols(j, k):
        for row in A:
            row[j], row[k] = row[k], row[j]
        for row in W:
            row[j], row[k] = row[k], row[j]

    def add_row(dst, src, f):
        A[dst] = [a + f * b for a, b in zip(A[dst], A[src])]
        V[dst] = [a + f * b for a, b in zip(V[dst], V[src])]

    def add_col(dst, src, f):
        for row in A:
            row[dst] += f * row[src]
        for row in W:
            row[dst] += f * row[src]

    for t in range(min(m, n)):
        while True:
            pos = _pick_pivot(A, t)
            if pos is None:
                break
            i, j = pos
            if i != t:
                swap_rows(t, i)
            if j != t:
                swap_cols(t, j)
            p = A[t][t]
            for i in range(t + 1, m):
                if A[i][t]:
                    add_row(i, t, -(A[i][t] // p))
            for j in range(t + 1, n):
                if A[t][j]:
                    add_col(j, t, -(A[t][j] // p))
            if any(A[i][t] for i in range(t + 1, m)) or any(A[t][j] for j in range(t + 1, n)):
                continue
            bad = next(
                (i for i in range(t + 1, m) for j in range(t + 1, n) if A[i][j] % p),
                None,
            )
            if bad is None:
                break
            add_row(t, bad, 1)
        if A[t][t] < 0:
            A[t] = [-x for x in A[t]]
            V[t] = [-x for x in V[t]]
        if A[t][t] == 0:
            break

    divisors = tuple(A[i][i] for i in range(min(m, n)))
    logger.debug("snf %sx%s -> divisors %s", m, n, divisors)
    return SmithDecomp(
        S=tuple(tuple(row) for row in A),
        V=tuple(tuple(row) for row in V),
        W=tuple(tuple(row) for row in W),
        divisors=divisors,
    )


# --- exact feasibility ------------------------------------------------------

@dataclass(frozen=True)
class Feasibility:
    status: str  # "feasible" | "infeasible"
    witness: Optional[Tuple[Fraction, ...]] = None

    @property
    def feasible(self) -> bool:
        return self.status == "feasible"


def _phase_one(A: List[List[Fraction]], b: List[Fraction], nvars: int) -> Optional[List[Fraction]]:
    """Find x >= 0 with A x = b (Bland's rule), or None."""
    m = len(A)
    if m == 0:
        return [Fraction(0)] * nvars
    T = []
    for i in range(m):
        row = list(A[i])
        rhs = b[i]
        if rhs < 0:
            row = [-x for x in row]
            rhs = -rhs
        art = [Fraction(0)] * m
        art[i] = Fraction(1)
        T.append(row + art + [rhs])
    width = nvars + m
    z = [-sum(T[i][j] for i in range(m)) for j in range(nvars)] + [Fraction(0)] * m
    z.append(-sum(T[i][width] for i in range(m)))
    basis = [nvars + i for i in range(m)]

    while True:
        entering = next((j for j in range(width) if z[j] < 0), None)
        if entering is None:
            break
        leave = None
        best = None
        for i in range(m):
            a = T[i][entering]
            if a > 0:
                ratio = T[i][width] / a
                if best is None or ratio < best or (ratio == best and basis[i] < basis[leave]):
                    best, leave = ratio, i
        if leave is None:
            # phase one objective is bounded below by zero
            raise ArithmeticError("unbounded phase-one simplex")
        p = T[leave][entering]
        T[leave] = [x / p for x in T[leave]]
        for i in range(m):
            if i != leave and T[i][entering] != 0:
                f = T[i][entering]
                T[i] = [x - f * y for x, y in zip(T[i], T[leave])]
        f = z[entering]
        z = [x - f * y for x, y in zip(z, T[leave])]
        basis[leave] = entering

    if z[width] != 0:
        return None
    x = [Fraction(0)] * nvars
    for i, var in enumerate(basis):
        if var < nvars:
            x[var] = T[i][width]
    return x


def _normalize_ineq(item) -> Tuple[List[Fraction], Fraction, bool]:
    if len(item) == 2:
        cov, rhs = item
        strict = False
    else:
        cov, rhs, strict = item
    return [rat(c) for c in cov], rat(rhs), bool(strict)


def lp_feasible(eqs: Sequence, ineqs: Sequence, nvars: Optional[int] = None) -> Feasibility:
    """
    Decide feasibility of a rational linear system in free variables.

    Args:
        eqs: (covector, rhs) pairs meaning <covector, x> = rhs
        ineqs: (covector, rhs) or (covector, rhs, strict) meaning
            <covector, x> >= rhs, or > rhs when strict is true
        nvars: number of variables (inferred from the first row otherwise)

    Returns:
        Feasibility with an exact witness when feasible
    """
    eq_rows = [([rat(c) for c in cov], rat(rhs)) for cov, rhs in eqs]
    in_rows = [_normalize_ineq(item) for item in ineqs]
    if nvars is None:
        first = eq_rows[0][0] if eq_rows else (in_rows[0][0] if in_rows else None)
        if first is None:
            raise ValueError("lp_feasible() needs nvars for an empty system")
        nvars = len(first)
    for cov, _ in eq_rows:
        if len(cov) != nvars:
            raise ValueError("covector length does not match the number of variables")
    for cov, _, _ in in_rows:
        if len(cov) != nvars:
            raise ValueError("covector length does not match the number of variables")

    homogenized = any(strict for _, _, strict in in_rows)
    # variable layout: x+ (nvars), x- (nvars), [lambda], slacks
    base = 2 * nvars + (1 if homogenized else 0)
    # lambda >= 1 makes x = y / lambda well defined
    total_ineqs = len(in_rows) + (1 if homogenized else 0)
    width = base + total_ineqs
    A: List[List[Fraction]] = []
    b: List[Fraction] = []

    def split(cov):
        return list(cov) + [-c for c in cov]

    for cov, rhs in eq_rows:
        row = split(cov)
        if homogenized:
            row.append(-rhs)
            rhs_val = Fraction(0)
        else:
            rhs_val = rhs
        A.append(row + [Fraction(0)] * total_ineqs)
        b.append(rhs_val)
    for k, (cov, rhs, strict) in enumerate(in_rows):
        row = split(cov)
        if homogenized:
            row.append(-rhs)
            rhs_val = Fraction(1) if strict else Fraction(0)
        else:
            rhs_val = rhs
        slack = [Fraction(0)] * total_ineqs
        slack[k] = Fraction(-1)
        A.append(row + slack)
        b.append(rhs_val)
    if homogenized:
        row = [Fraction(0)] * (2 * nvars) + [Fraction(1)]
        slack = [Fraction(0)] * total_ineqs
        slack[len(in_rows)] = Fraction(-1)
        A.append(row + slack)
        b.append(Fraction(1))

    sol = _phase_one(A, b, width)
    if sol is None:
        return Feasibility("infeasible")
    x = [sol[i] - sol[nvars + i] for i in range(nvars)]
    if homogenized:
        lam = sol[2 * nvars]
        x = [v / lam for v in x]
    return Feasibility("feasible", tuple(x))
