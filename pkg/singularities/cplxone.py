# singularities/cplxone.py
"""
Defining matrices of rational threefold singularities with a two-torus action.

A defining matrix P has r+2 rows. Column block i (0 <= i <= r) carries the
exponents l_i and a 2 x n_i data block d_i; the trailing m columns are the
lineality columns d'_k:

    [ -l_0  l_1        0   0 ... 0 ]
    [  :         .         :     : ]
    [ -l_0   0       l_r   0 ... 0 ]
    [  d_0  d_1 ...  d_r  d'_1 .. d'_m ]

Points of the tropical leaf of block i are written in local coordinates
(t, a, b) meaning t * e_i + a * e_{r+1} + b * e_{r+2}, with e_0 replaced by
-(e_1 + ... + e_r). Columns of block i sit at t = l_ij, lineality columns and
the points v(tau)' at t = 0.

The canonicity test looks for lattice points of the leaf polytopes
conv(0, block columns, v(tau)', lineality columns) that lie strictly below the
plane carrying the columns.
"""

import logging
import random
from dataclasses import dataclass, field, replace
from fractions import Fraction
from itertools import product
from math import gcd, prod
from typing import Dict, List, Optional, Sequence, Tuple, Union

from geometry.exact import integral_multiple, is_primitive, lp_feasible, nullspace, rank, row_reduce
from geometry.polytope import VPolytope, lattice_points

logger = logging.getLogger(__name__)

NORMAL_FORM_CASES = ("zeta1", "i", "ii", "iii", "iv", "v", "vi")
OP_KINDS = ("swap_columns", "swap_blocks", "add_upper_row", "last_rows", "swap_lineality")

LINEALITY = "lineality"


class NotInNormalFormError(ValueError):
    """The matrix matches none of the normal-form patterns."""


@dataclass(frozen=True)
class Block:
    l: Tuple[int, ...]
    d: Tuple[Tuple[int, ...], Tuple[int, ...]]

    def __post_init__(self):
        object.__setattr__(self, "l", tuple(int(x) for x in self.l))
        object.__setattr__(self, "d", tuple(tuple(int(x) for x in row) for row in self.d))
        if not self.l:
            raise ValueError("A column block needs at least one column")
        if any(x < 1 for x in self.l):
            raise ValueError(f"Exponents must be positive, got {self.l}")
        if len(self.d) != 2 or any(len(row) != len(self.l) for row in self.d):
            raise ValueError(f"Data block must be 2 x {len(self.l)}")

    @property
    def n(self) -> int:
        return len(self.l)

    @property
    def maximum(self) -> int:
        return max(self.l)

    def local(self, j: int) -> Tuple[int, int, int]:
        return (self.l[j], self.d[0][j], self.d[1][j])


@dataclass(frozen=True)
class DefiningMatrix:
    blocks: Tuple[Block, ...]
    lineality: Tuple[Tuple[int, int], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "blocks", tuple(self.blocks))
        object.__setattr__(self, "lineality", tuple(tuple(int(x) for x in v) for v in self.lineality))
        if len(self.blocks) < 2:
            raise ValueError("A defining matrix needs r >= 1, i.e. at least two column blocks")
        if any(len(v) != 2 for v in self.lineality):
            raise ValueError("Lineality columns are integer 2-vectors")

    @property
    def r(self) -> int:
        return len(self.blocks) - 1

    @property
    def n(self) -> int:
        return sum(b.n for b in self.blocks)

    @property
    def m(self) -> int:
        return len(self.lineality)

    @classmethod
    def from_blocks(cls, l_blocks, d_blocks, dprime=()) -> "DefiningMatrix":
        if len(l_blocks) != len(d_blocks):
            raise ValueError("Need as many data blocks as exponent blocks")
        return cls(tuple(Block(l, d) for l, d in zip(l_blocks, d_blocks)), tuple(dprime))

    @classmethod
    def from_matrix(
        cls,
        rows: Sequence[Sequence[int]],
        block_sizes: Optional[Sequence[int]] = None,
        m: Optional[int] = None,
    ) -> "DefiningMatrix":
        """
        Read the block structure off an (r+2) x (n+m) integer matrix.

        Args:
            rows: matrix rows, the r exponent rows first
            block_sizes: n_0..n_r (detected from the sign pattern if omitted)
            m: number of lineality columns (detected if omitted)

        Returns:
            DefiningMatrix
        """
        rows = [[int(x) for x in row] for row in rows]
        if len(rows) < 3 or len({len(row) for row in rows}) != 1:
            raise ValueError("A defining matrix has at least 3 rows of equal length")
        r = len(rows) - 2
        cols = [tuple(row[c] for row in rows) for c in range(len(rows[0]))]
        if block_sizes is None:
            block_sizes, detected_m = _detect_blocks(cols, r)
            m = detected_m if m is None else m
        if len(block_sizes) != r + 1:
            raise ValueError(f"Expected {r + 1} block sizes, got {len(block_sizes)}")
        if m is None:
            m = len(cols) - sum(block_sizes)
        if sum(block_sizes) + m != len(cols):
            raise ValueError("Block sizes and lineality count do not add up to the column count")
        blocks = []
        pos = 0
        for i, size in enumerate(block_sizes):
            chunk = cols[pos:pos + size]
            pos += size
            l = []
            for col in chunk:
                lval = -col[0] if i == 0 else col[i - 1]
                if tuple(col[:r]) != global_point(i, lval, 0, 0, r)[:r]:
                    raise ValueError(f"Column {col} does not fit block {i}")
                l.append(lval)
            d = (tuple(col[r] for col in chunk), tuple(col[r + 1] for col in chunk))
            blocks.append(Block(tuple(l), d))
        lin = []
        for col in cols[pos:]:
            if any(col[:r]):
                raise ValueError(f"Lineality column {col} has nonzero upper entries")
            lin.append((col[r], col[r + 1]))
        return cls(tuple(blocks), tuple(lin))

    def columns(self) -> List[Tuple[int, ...]]:
        """Global columns, block by block, lineality last."""
        return [self.global_point(i, *b.local(j)) for i, b in enumerate(self.blocks) for j in range(b.n)] + [
            self.global_point(LINEALITY, 0, a, bb) for a, bb in self.lineality
        ]

    def column_labels(self) -> List[str]:
        return [f"T{i}{j + 1}" for i, b in enumerate(self.blocks) for j in range(b.n)] + [
            f"S{k + 1}" for k in range(self.m)
        ]

    def to_matrix(self) -> List[List[int]]:
        cols = self.columns()
        return [[col[row] for col in cols] for row in range(self.r + 2)]

    def global_point(self, leaf, t, a, b) -> Tuple:
        return global_point(leaf, t, a, b, self.r)

    def local_columns(self, i: int) -> List[Tuple[int, int, int]]:
        return [self.blocks[i].local(j) for j in range(self.blocks[i].n)]

    def lineality_points(self) -> List[Tuple[int, int, int]]:
        return [(0, a, b) for a, b in self.lineality]

    def maximal_tuple(self) -> Tuple[int, ...]:
        return tuple(b.maximum for b in self.blocks)

    def leading_tuple(self) -> Tuple[int, ...]:
        return tuple(b.l[0] for b in self.blocks)


def _detect_blocks(cols, r: int) -> Tuple[List[int], int]:
    sizes = [0] * (r + 1)
    m = 0
    current = 0
    for col in cols:
        top = col[:r]
        if not any(top):
            leaf = LINEALITY
        elif all(x == top[0] for x in top) and top[0] < 0:
            leaf = 0
        else:
            nonzero = [k for k, x in enumerate(top) if x]
            if len(nonzero) != 1 or top[nonzero[0]] < 0:
                raise ValueError(f"Column {col} fits no column block")
            leaf = nonzero[0] + 1
        if leaf == LINEALITY:
            m += 1
            continue
        if m or leaf < current:
            raise ValueError("Columns must be grouped block by block with lineality columns last")
        current = leaf
        sizes[leaf] += 1
    return sizes, m


def global_point(leaf, t, a, b, r: int) -> Tuple:
    """Global coordinates of the local point (t, a, b) of a leaf."""
    if leaf == LINEALITY or t == 0:
        return tuple([0] * r + [a, b])
    if leaf == 0:
        return tuple([-t] * r + [a, b])
    return tuple([t if k == leaf - 1 else 0 for k in range(r)] + [a, b])


@dataclass(frozen=True)
class LeafPoint:
    """t * e_leaf + a * e_{r+1} + b * e_{r+2}; points with t = 0 belong to the lineality plane."""
    leaf: Union[int, str]
    t: Fraction
    a: Fraction
    b: Fraction

    def __post_init__(self):
        for name in ("t", "a", "b"):
            object.__setattr__(self, name, Fraction(getattr(self, name)))
        if self.t < 0:
            raise ValueError("Leaf parameter t must be non-negative")
        if self.t == 0:
            object.__setattr__(self, "leaf", LINEALITY)
        elif self.leaf == LINEALITY:
            raise ValueError("Points of the lineality plane have t = 0")

    @property
    def coords(self) -> Tuple[Fraction, Fraction, Fraction]:
        return (self.t, self.a, self.b)

    def sort_key(self):
        leaf = -1 if self.leaf == LINEALITY else self.leaf
        return (leaf, self.t, self.a, self.b)


def local_coordinates(P: DefiningMatrix, column: int) -> LeafPoint:
    """Leaf point of the column with the given global index."""
    pos = column
    for i, b in enumerate(P.blocks):
        if pos < b.n:
            return LeafPoint(i, *b.local(pos))
        pos -= b.n
    if pos < P.m:
        return LeafPoint(LINEALITY, 0, *P.lineality[pos])
    raise ValueError(f"Column index {column} out of range")


def witness_in_global(P: DefiningMatrix, p: LeafPoint) -> Tuple[int, ...]:
    g = global_point(p.leaf, p.t, p.a, p.b, P.r)
    return tuple(int(x) if Fraction(x).denominator == 1 else x for x in g)


# --- validation -------------------------------------------------------------

def _face_feasible(cols: Sequence[Sequence[int]], on: Sequence[int], dim: int) -> bool:
    """Some covector vanishes on cols[on] and is >= 1 on every other column."""
    inside = set(on)
    eqs = [(cols[c], 0) for c in on]
    ineqs = [(cols[c], 1) for c in range(len(cols)) if c not in inside]
    return lp_feasible(eqs, ineqs, nvars=dim).feasible


def validate(P: DefiningMatrix, include_redundancy: bool = True) -> List[str]:
    """
    Check the requirements on a defining matrix.

    A block with all exponents 1 and a single column is only flagged when
    include_redundancy is set; such matrices still define a variety.

    Returns:
        List of diagnostics, empty when P is valid
    """
    problems: List[str] = []
    cols = P.columns()
    dim = P.r + 2
    for c, col in enumerate(cols):
        if not is_primitive(col):
            problems.append(f"column {c} {col} is not primitive")
    seen: Dict[Tuple[int, ...], int] = {}
    for c, col in enumerate(cols):
        if col in seen:
            problems.append(f"columns {seen[col]} and {c} coincide")
        else:
            seen[col] = c
    if rank(cols) != dim:
        problems.append(f"columns do not span Q^{dim}")
    if not lp_feasible([], [(col, 1) for col in cols], nvars=dim).feasible:
        problems.append("column cone is not pointed")
    elif not problems:
        for c in range(len(cols)):
            if not _face_feasible(cols, [c], dim):
                problems.append(f"column {c} {cols[c]} is not an extremal ray")
    for i, b in enumerate(P.blocks):
        if include_redundancy and b.maximum == 1 and b.n < 2:
            problems.append(f"block {i} is redundant (all exponents 1 with a single column)")
    for msg in problems:
        logger.debug("validate: %s", msg)
    return problems


def ensure_valid(P: DefiningMatrix) -> None:
    problems = validate(P, include_redundancy=False)
    if problems:
        raise ValueError("Invalid defining matrix: " + "; ".join(problems))


def is_platonic(t: Sequence[int]) -> bool:
    if not t:
        raise ValueError("is_platonic() needs a nonempty tuple")
    s = sorted(t, reverse=True)
    if len(s) <= 2:
        return True
    if any(x != 1 for x in s[3:]):
        return False
    a, b, c = s[:3]
    return (a, b, c) in ((5, 3, 2), (4, 3, 2), (3, 3, 2)) or (b, c) == (2, 2) or c == 1


def is_log_terminal(P: DefiningMatrix) -> bool:
    return is_platonic(P.maximal_tuple())


# --- admissible operations --------------------------------------------------

@dataclass(frozen=True)
class AdmissibleOp:
    """
    kind / args:
        swap_columns   (block, j1, j2)
        swap_blocks    (i1, i2)
        add_upper_row  (s, target, c): add c * (exponent row s) to data row target (0 or 1)
        last_rows      (a11, a12, a21, a22): unimodular change of the two data rows
        swap_lineality (k1, k2)
    """
    kind: str
    args: Tuple[int, ...]


def admissible(P: DefiningMatrix, op: AdmissibleOp) -> DefiningMatrix:
    kind, args = op.kind, tuple(op.args)
    blocks = list(P.blocks)
    if kind == "swap_columns":
        i, j1, j2 = args
        if not 0 <= i <= P.r or not (0 <= j1 < blocks[i].n and 0 <= j2 < blocks[i].n):
            raise ValueError(f"Invalid column swap {args}")
        b = blocks[i]
        order = list(range(b.n))
        order[j1], order[j2] = order[j2], order[j1]
        blocks[i] = Block(tuple(b.l[j] for j in order), tuple(tuple(row[j] for j in order) for row in b.d))
        return replace(P, blocks=tuple(blocks))
    if kind == "swap_blocks":
        i1, i2 = args
        if not (0 <= i1 <= P.r and 0 <= i2 <= P.r):
            raise ValueError(f"Invalid block exchange {args}")
        blocks[i1], blocks[i2] = blocks[i2], blocks[i1]
        return replace(P, blocks=tuple(blocks))
    if kind == "add_upper_row":
        s, target, c = args
        if not 1 <= s <= P.r or target not in (0, 1):
            raise ValueError(f"Invalid row addition {args}")
        for i, sign in ((0, -1), (s, 1)):
            b = blocks[i]
            rows = [list(b.d[0]), list(b.d[1])]
            rows[target] = [x + sign * c * lj for x, lj in zip(rows[target], b.l)]
            blocks[i] = Block(b.l, (tuple(rows[0]), tuple(rows[1])))
        return replace(P, blocks=tuple(blocks))
    if kind == "last_rows":
        a11, a12, a21, a22 = args
        if abs(a11 * a22 - a12 * a21) != 1:
            raise ValueError(f"Row operation {args} is not unimodular")

        def move(x, y):
            return (a11 * x + a12 * y, a21 * x + a22 * y)

        new_blocks = []
        for b in blocks:
            pairs = [move(x, y) for x, y in zip(*b.d)]
            new_blocks.append(Block(b.l, (tuple(p[0] for p in pairs), tuple(p[1] for p in pairs))))
        return DefiningMatrix(tuple(new_blocks), tuple(move(x, y) for x, y in P.lineality))
    if kind == "swap_lineality":
        k1, k2 = args
        if not (0 <= k1 < P.m and 0 <= k2 < P.m):
            raise ValueError(f"Invalid lineality swap {args}")
        lin = list(P.lineality)
        lin[k1], lin[k2] = lin[k2], lin[k1]
        return replace(P, lineality=tuple(lin))
    raise ValueError(f"Unknown admissible operation: {kind}")


def _random_op(P: DefiningMatrix, rng: random.Random, preserve_normal_form: bool) -> Optional[AdmissibleOp]:
    kind = rng.choice(OP_KINDS)
    if kind == "swap_columns":
        first = 1 if preserve_normal_form else 0
        candidates = [i for i, b in enumerate(P.blocks) if b.n - first >= 2]
        if not candidates:
            return None
        i = rng.choice(candidates)
        j1, j2 = rng.sample(range(first, P.blocks[i].n), 2)
        return AdmissibleOp(kind, (i, j1, j2))
    if kind == "swap_blocks":
        if preserve_normal_form:
            return None
        i1, i2 = rng.sample(range(P.r + 1), 2)
        return AdmissibleOp(kind, (i1, i2))
    if kind == "add_upper_row":
        target = 0 if preserve_normal_form else rng.randint(0, 1)
        return AdmissibleOp(kind, (rng.randint(1, P.r), target, rng.choice((-2, -1, 1, 2))))
    if kind == "last_rows":
        c = rng.randint(-2, 2)
        sign = rng.choice((1, -1))
        if preserve_normal_form:
            return AdmissibleOp(kind, (sign, c, 0, 1))
        return rng.choice([
            AdmissibleOp(kind, (sign, c, 0, 1)),
            AdmissibleOp(kind, (1, 0, c, sign)),
            AdmissibleOp(kind, (0, 1, 1, 0)),
        ])
    if P.m < 2:
        return None
    k1, k2 = rng.sample(range(P.m), 2)
    return AdmissibleOp(kind, (k1, k2))


def random_admissible_sequence(
    P: DefiningMatrix, steps: int, rng: random.Random, preserve_normal_form: bool = False
) -> Tuple[DefiningMatrix, List[AdmissibleOp]]:
    """Apply a random sequence of admissible operations; returns the result and the ops used."""
    ops = []
    while len(ops) < steps:
        op = _random_op(P, rng, preserve_normal_form)
        if op is None:
            continue
        P = admissible(P, op)
        ops.append(op)
    return P, ops


# --- normal forms -----------------------------------------------------------

@dataclass(frozen=True)
class NormalFormInfo:
    case: str
    iota: int
    zeta: int
    mu: Optional[int] = None


def _value(rule: str, iota: int, l: int) -> int:
    if rule == "plus":
        return iota + l
    if rule == "minus":
        return iota - l
    return iota * (1 - l)


# (zeta, leading triple test, rules for leaves 0..2, congruence on iota)
_PATTERNS = {
    "i": (2, lambda a, b, c: (a, b, c) == (4, 3, 2), ("plus", "times", "minus"), lambda i: i % 2 == 0),
    "ii": (3, lambda a, b, c: (a, b, c) == (3, 3, 2), ("minus", "plus", "times"), lambda i: i % 3 == 0),
    "iii": (4, lambda a, b, c: a % 2 == 1 and (b, c) == (2, 2), ("times", "minus", "plus"), lambda i: i % 4 == 2),
    "iv": (2, lambda a, b, c: a % 2 == 0 and (b, c) == (2, 2), ("minus", "plus", "times"), lambda i: i % 2 == 0),
    "v": (2, lambda a, b, c: (b, c) == (2, 2), ("times", "minus", "plus"), lambda i: i % 2 == 0),
}


def _zeta_one(P: DefiningMatrix) -> Optional[NormalFormInfo]:
    iota = P.blocks[1].d[1][0]
    if iota < 1:
        return None
    r = P.r
    b0 = P.blocks[0]
    if any(d != iota * (1 - (r - 1) * l) for d, l in zip(b0.d[1], b0.l)):
        return None
    if any(d != iota for b in P.blocks[1:] for d in b.d[1]):
        return None
    if any(d2 != iota for _, d2 in P.lineality):
        return None
    return NormalFormInfo("zeta1", iota, 1)


def _pattern(P: DefiningMatrix, case: str) -> Optional[NormalFormInfo]:
    zeta, triple_ok, rules, congruent = _PATTERNS[case]
    if P.r < 2 or not triple_ok(*P.leading_tuple()[:3]):
        return None
    if any(b.l[0] != 1 for b in P.blocks[3:]):
        return None
    # iota from the first leaf with an additive rule
    leaf = next(k for k, rule in enumerate(rules) if rule != "times")
    b = P.blocks[leaf]
    iota = zeta * b.d[1][0] + (b.l[0] if rules[leaf] == "minus" else -b.l[0])
    if iota < 1 or not congruent(iota):
        return None
    for k, rule in enumerate(rules):
        b = P.blocks[k]
        if any(zeta * d != _value(rule, iota, l) for d, l in zip(b.d[1], b.l)):
            return None
    if any(d != 0 for b in P.blocks[3:] for d in b.d[1]):
        return None
    if any(zeta * d2 != iota for _, d2 in P.lineality):
        return None
    return NormalFormInfo(case, iota, zeta)


def _case_vi(P: DefiningMatrix) -> Optional[NormalFormInfo]:
    if any(b.l[0] != 1 for b in P.blocks[2:]):
        return None
    if any(d != 0 for b in P.blocks[2:] for d in b.d[1]):
        return None
    b0, b1 = P.blocks[0], P.blocks[1]
    rows = [[1, -d, -l] for d, l in zip(b0.d[1], b0.l)]
    rows += [[1, -d, l] for d, l in zip(b1.d[1], b1.l)]
    rows += [[1, -d2, 0] for _, d2 in P.lineality]
    ns = nullspace(rows, 3)
    if len(ns) != 1:
        return None
    iota, zeta, mu = integral_multiple(ns[0])
    if zeta < 0:
        iota, zeta, mu = -iota, -zeta, -mu
    if iota < 1 or zeta < 2:
        return None
    return NormalFormInfo("vi", iota, zeta, mu)


def normal_form_info(P: DefiningMatrix) -> NormalFormInfo:
    """
    Recognize the normal-form case of P from its last row.

    Returns:
        NormalFormInfo(case, iota, zeta, mu)

    Raises:
        NotInNormalFormError: no pattern matches
    """
    info = _zeta_one(P)
    if info is None:
        for case in ("i", "ii", "iii", "iv", "v"):
            info = _pattern(P, case)
            if info is not None:
                break
    if info is None:
        info = _case_vi(P)
    if info is None:
        raise NotInNormalFormError(
            f"Matrix with leading tuple {P.leading_tuple()} matches no normal-form case"
        )
    logger.debug("normal form %s", info)
    return info


def leaf_plane(P: DefiningMatrix, info: NormalFormInfo, i: int) -> Tuple[Fraction, Fraction, Fraction, Fraction]:
    """Coefficients (c_t, c_a, c_b, c_0) of c_t*t + c_a*a + c_b*b + c_0 = 0 for leaf i."""
    b = P.blocks[i]
    c = Fraction(info.iota - info.zeta * b.d[1][0], b.l[0])
    return (c, Fraction(0), Fraction(info.zeta), Fraction(-info.iota))


# --- elementary cones -------------------------------------------------------

@dataclass(frozen=True)
class ElementaryCone:
    choice: Tuple[int, ...]
    is_face: bool
    ell_i: Tuple[int, ...]
    ell_tau: int
    v_tau: Tuple[int, ...]
    v_tau_prime: LeafPoint


def elementary_cones(P: DefiningMatrix) -> List[ElementaryCone]:
    """
    All cones spanned by one column per block.

    Returns:
        ElementaryCone list in lexicographic order of the column choices
    """
    cols = P.columns()
    offsets = []
    pos = 0
    for b in P.blocks:
        offsets.append(pos)
        pos += b.n
    dim = P.r + 2
    cones = []
    for choice in product(*(range(b.n) for b in P.blocks)):
        ls = [P.blocks[i].l[j] for i, j in enumerate(choice)]
        total = prod(ls)
        ell_i = tuple(total // x for x in ls)
        ell_tau = (1 - P.r) * total + sum(ell_i)
        if ell_tau <= 0:
            raise ValueError(f"Elementary cone {choice} has ell_tau = {ell_tau} <= 0 (not log terminal)")
        a = sum(e * P.blocks[i].d[0][j] for e, (i, j) in zip(ell_i, enumerate(choice)))
        b = sum(e * P.blocks[i].d[1][j] for e, (i, j) in zip(ell_i, enumerate(choice)))
        v_tau = tuple([0] * P.r + [a, b])
        is_face = _face_feasible(cols, [offsets[i] + j for i, j in enumerate(choice)], dim)
        cones.append(
            ElementaryCone(
                choice=tuple(choice),
                is_face=is_face,
                ell_i=ell_i,
                ell_tau=ell_tau,
                v_tau=v_tau,
                v_tau_prime=LeafPoint(LINEALITY, 0, Fraction(a, ell_tau), Fraction(b, ell_tau)),
            )
        )
    return cones


# --- anticanonical complex --------------------------------------------------

Form = Tuple[Fraction, Fraction, Fraction]


def anticanonical_forms(P: DefiningMatrix, cones: Optional[List[ElementaryCone]] = None) -> Optional[List[Form]]:
    """
    Linear forms u_i(t, a, b) per leaf with u_i = 1 on the block-i columns, the
    lineality columns and every v(tau)' of a P-elementary cone. The (a, b) part
    is shared by all leaves.

    Returns:
        One form per leaf, or None if the conditions do not pin the forms down

    Raises:
        ValueError: the conditions are inconsistent
    """
    if cones is None:
        cones = elementary_cones(P)
    width = P.r + 3
    rows = []
    for i, b in enumerate(P.blocks):
        for t, a, bb in P.local_columns(i):
            row = [0] * width
            row[i], row[-2], row[-1] = t, a, bb
            rows.append(row + [1])
    flat = P.lineality_points() + [c.v_tau_prime.coords for c in cones if c.is_face]
    for _, a, bb in flat:
        row = [0] * width
        row[-2], row[-1] = a, bb
        rows.append(row + [1])
    R, pivots = row_reduce(rows)
    if width in pivots:
        raise ValueError("No piecewise linear form takes the value 1 on all columns and v(tau)'")
    if len(pivots) < width:
        return None
    sol = [Fraction(0)] * width
    for row, p in zip(R, pivots):
        sol[p] = row[-1]
    return [(sol[i], sol[-2], sol[-1]) for i in range(P.r + 1)]


def _normal_form_forms(P: DefiningMatrix, info: NormalFormInfo) -> List[Form]:
    forms = []
    for i in range(P.r + 1):
        c_t, c_a, c_b, c_0 = leaf_plane(P, info, i)
        forms.append((c_t / -c_0, c_a / -c_0, c_b / -c_0))
    return forms


def _evaluate(form: Form, p: Sequence) -> Fraction:
    return form[0] * p[0] + form[1] * p[1] + form[2] * p[2]


@dataclass(frozen=True)
class LeafComplex:
    leaf: int
    polytope: VPolytope
    plane: Tuple[Fraction, Fraction, Fraction, Fraction]


def _leaf_polytope(P: DefiningMatrix, i: int, cones: List[ElementaryCone]) -> VPolytope:
    pts = [(0, 0, 0)] + P.local_columns(i) + P.lineality_points()
    pts += [c.v_tau_prime.coords for c in cones if c.is_face]
    return VPolytope.from_points(pts)


def leaf_complex(P: DefiningMatrix, i: int, cones: Optional[List[ElementaryCone]] = None) -> LeafComplex:
    """Leaf polytope in local coordinates with the plane of the normal form."""
    if not 0 <= i <= P.r:
        raise ValueError(f"Leaf index {i} out of range 0..{P.r}")
    info = normal_form_info(P)
    if cones is None:
        cones = elementary_cones(P)
    return LeafComplex(leaf=i, polytope=_leaf_polytope(P, i, cones), plane=leaf_plane(P, info, i))


@dataclass(frozen=True)
class SingularityVerdict:
    log_terminal: bool
    canonical: bool
    terminal: bool
    witnesses: Tuple[LeafPoint, ...] = ()
    normal_form: Optional[NormalFormInfo] = None
    notes: Tuple[str, ...] = field(default_factory=tuple)


def _resolve_forms(P: DefiningMatrix, cones, info: Optional[NormalFormInfo]) -> Tuple[List[Form], List[str]]:
    notes = []
    forms = anticanonical_forms(P, cones)
    if info is not None:
        expected = _normal_form_forms(P, info)
        if forms is None:
            forms = expected
        elif forms != expected:
            notes.append("normal-form planes differ from the intrinsic planes")
            logger.warning("normal-form planes differ from the intrinsic planes for %s", info)
    if forms is None:
        raise NotInNormalFormError("Anticanonical planes are not determined and no normal form was recognized")
    return forms, notes


def verdict(P: DefiningMatrix, require_normal_form: bool = True) -> SingularityVerdict:
    """
    Decide log terminality, canonicity and terminality of X(P).

    Args:
        P: defining matrix
        require_normal_form: refuse matrices outside the normal forms (default);
            when false the planes are taken from the intrinsic linear forms alone

    Returns:
        SingularityVerdict; witnesses are the offending lattice points
    """
    ensure_valid(P)
    if not is_log_terminal(P):
        return SingularityVerdict(False, False, False)
    try:
        info = normal_form_info(P)
    except NotInNormalFormError:
        if require_normal_form:
            raise
        info = None
    cones = elementary_cones(P)
    forms, notes = _resolve_forms(P, cones, info)
    columns = {(LINEALITY, 0, a, b) for a, b in P.lineality}
    below: Dict[tuple, LeafPoint] = {}
    extra: Dict[tuple, LeafPoint] = {}
    for i in range(P.r + 1):
        leaf_cols = {(i, t, a, b) for t, a, b in P.local_columns(i)}
        for p in lattice_points(_leaf_polytope(P, i, cones)):
            if not any(p):
                continue
            point = LeafPoint(i, *p)
            key = (point.leaf, p[0], p[1], p[2])
            value = _evaluate(forms[i], p)
            if value != 1:
                below[key] = point
            elif key not in leaf_cols and key not in columns:
                extra[key] = point
        logger.debug("leaf %d: %d below, %d extra", i, len(below), len(extra))
    canonical = not below
    terminal = canonical and not extra
    witnesses = below if not canonical else extra
    ordered = tuple(sorted(witnesses.values(), key=LeafPoint.sort_key))
    return SingularityVerdict(True, canonical, terminal, ordered, info, tuple(notes))


def discrepancy(P: DefiningMatrix, p: LeafPoint, require_normal_form: bool = True) -> Fraction:
    """
    u(p) - 1 for the leaf form u: zero on the plane of the columns, negative
    for primitive points strictly between the origin and the plane.
    """
    coords = [int(x) for x in p.coords if x.denominator == 1]
    if len(coords) != 3 or gcd(*coords) != 1:
        raise ValueError(f"discrepancy() needs a primitive lattice point, got {p}")
    try:
        info = normal_form_info(P)
    except NotInNormalFormError:
        if require_normal_form:
            raise
        info = None
    forms, _ = _resolve_forms(P, elementary_cones(P), info)
    leaf = 0 if p.leaf == LINEALITY else p.leaf
    value = _evaluate(forms[leaf], p.coords)
    if value <= 0:
        raise ValueError(f"The ray through {p} never meets the plane")
    return value - 1
