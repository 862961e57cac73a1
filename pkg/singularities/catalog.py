# singularities/catalog.py
"""
Machine-readable catalog of the classified defining matrices, the toric
canonical non-Gorenstein polytopes and a set of non-canonical controls, with
the harness that re-verifies all of them.

Fixed matrices live as rows in data/catalog.json together with the
parameter schemas and grids of the series; the constructors of the
parameterized entries are below.
"""

import json
import logging
import os
import re
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from math import gcd
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple, Union

from geometry.lemmas import IICase, ii_class_group_expected, ii_polytope
from geometry.polytope import VPolytope, is_canonical_polytope, is_terminal_polytope
from singularities.coxring import (
    ClassGroup,
    DegreeMatrix,
    anticanonical_class,
    class_group,
    equivalent_gradings,
    toric_matrix,
)
from singularities.cplxone import (
    Block,
    DefiningMatrix,
    NotInNormalFormError,
    ensure_valid,
    normal_form_info,
    verdict,
    witness_in_global,
)

logger = logging.getLogger(__name__)

DEFAULT_CATALOG_PATH = os.path.join(os.path.dirname(__file__), "data", "catalog.json")
ENTRY_KINDS = ("matrix", "toric", "control")
PASS = "pass"
FAIL = "fail"

Params = Dict[str, Any]


class ConstraintViolation(ValueError):
    """Parameters break one of the constraints of a catalog entry."""

    def __init__(self, entry_id: str, constraint: str):
        super().__init__(f"{entry_id}: constraint violated: {constraint}")
        self.entry_id = entry_id
        self.constraint = constraint


@dataclass(frozen=True)
class Expected:
    case: str
    iota: Optional[int] = None
    zeta: Optional[int] = None
    canonical: bool = True
    terminal: bool = False


@dataclass(frozen=True)
class CatalogEntry:
    id: str
    kind: str
    aliases: Tuple[str, ...] = ()
    case: Optional[str] = None
    params: Dict[str, Dict[str, Any]] = field(default_factory=dict)
    constraints: Tuple[str, ...] = ()
    grid: Tuple[Params, ...] = ({},)
    rows: Optional[Tuple[Tuple[int, ...], ...]] = None
    expect: Optional[Dict[str, Any]] = None
    witness: Optional[Tuple[int, ...]] = None
    notes: Tuple[str, ...] = ()

    @property
    def is_series(self) -> bool:
        return bool(self.params)

    @property
    def smallest(self) -> Params:
        return dict(self.grid[0]) if self.grid else {}


# --- loading ----------------------------------------------------------------

def _entry_from_json(raw: Dict[str, Any]) -> CatalogEntry:
    if raw.get("kind") not in ENTRY_KINDS:
        raise ValueError(f"Catalog entry {raw.get('id')} has unknown kind {raw.get('kind')!r}")
    rows = raw.get("rows")
    witness = raw.get("witness")
    return CatalogEntry(
        id=raw["id"],
        kind=raw["kind"],
        aliases=tuple(raw.get("aliases", ())),
        case=raw.get("case") or (raw.get("expect") or {}).get("case"),
        params=dict(raw.get("params", {})),
        constraints=tuple(raw.get("constraints", ())),
        grid=tuple(dict(p) for p in raw.get("grid", [{}])),
        rows=tuple(tuple(row) for row in rows) if rows is not None else None,
        expect=raw.get("expect"),
        witness=tuple(witness) if witness is not None else None,
        notes=tuple(raw.get("notes", ())),
    )


@lru_cache(maxsize=4)
def load_catalog(path: Optional[str] = None) -> Tuple[Dict[str, CatalogEntry], Dict[str, str]]:
    """
    Read the catalog data file.

    Returns:
        (entries by id, alias -> id)
    """
    path = path or os.getenv("LATTICE_CATALOG_PATH") or DEFAULT_CATALOG_PATH
    with open(path, "r", encoding="utf-8") as f:
        data = json.load(f)
    if str(data.get("schema_version")) != "1":
        raise ValueError(f"Unsupported catalog schema version: {data.get('schema_version')}")
    entries: Dict[str, CatalogEntry] = {}
    aliases: Dict[str, str] = {}
    for raw in data["entries"]:
        entry = _entry_from_json(raw)
        if entry.id in entries:
            raise ValueError(f"Duplicate catalog id: {entry.id}")
        entries[entry.id] = entry
        for alias in entry.aliases:
            aliases[alias] = entry.id
    logger.debug("loaded %d catalog entries from %s", len(entries), path)
    return entries, aliases


def _sort_key(entry_id: str):
    prefix = {"P": 0, "NC": 1, "toric": 2}
    head, _, tail = entry_id.partition("_")
    number = int(tail) if tail.isdigit() else 0
    return (prefix.get(head, 3), number, tail)


def list_entries(kind: Optional[str] = None) -> List[CatalogEntry]:
    entries, _ = load_catalog()
    selected = [e for e in entries.values() if kind is None or e.kind == kind]
    return sorted(selected, key=lambda e: _sort_key(e.id))


def resolve_id(entry_id: str) -> str:
    entries, aliases = load_catalog()
    if entry_id in entries:
        return entry_id
    if entry_id in aliases:
        return aliases[entry_id]
    # P13, p13 and P_13 all name the same entry
    match = re.fullmatch(r"[Pp]_?(\d+)", entry_id)
    if match and f"P_{int(match.group(1))}" in entries:
        return f"P_{int(match.group(1))}"
    raise ValueError(f"Unknown catalog entry: {entry_id}")


def get_entry(entry_id: str) -> CatalogEntry:
    entries, _ = load_catalog()
    return entries[resolve_id(entry_id)]


def negative_controls() -> List[CatalogEntry]:
    return list_entries("control")


# --- parameter checking -----------------------------------------------------

def _check_scalar(entry_id: str, name: str, value: Any, rule: Dict[str, Any]) -> None:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConstraintViolation(entry_id, f"{name} must be an integer")
    if "min" in rule and value < rule["min"]:
        raise ConstraintViolation(entry_id, f"{name} >= {rule['min']}")
    if "max" in rule and value > rule["max"]:
        raise ConstraintViolation(entry_id, f"{name} <= {rule['max']}")
    if "mod" in rule:
        m, res = rule["mod"]
        if value % m != res:
            raise ConstraintViolation(entry_id, f"{name} = {res} mod {m}")
    if "not_mod" in rule:
        m, res = rule["not_mod"]
        if value % m == res:
            raise ConstraintViolation(entry_id, f"{name} != {res} mod {m}")


def check_params(entry: CatalogEntry, params: Params) -> Params:
    """Validate params against the schema of the entry; returns a normalized copy."""
    unknown = set(params) - set(entry.params)
    if unknown:
        raise ConstraintViolation(entry.id, f"unknown parameters {sorted(unknown)}")
    out: Params = {}
    for name, rule in entry.params.items():
        if name not in params:
            if rule.get("optional"):
                continue
            raise ConstraintViolation(entry.id, f"parameter {name} is required")
        value = params[name]
        if rule.get("type") == "list":
            if not isinstance(value, (list, tuple)):
                raise ConstraintViolation(entry.id, f"{name} must be a list")
            value = list(value)
            if len(value) < rule.get("length_min", 0):
                raise ConstraintViolation(entry.id, f"len({name}) >= {rule['length_min']}")
            if "length_max" in rule and len(value) > rule["length_max"]:
                raise ConstraintViolation(entry.id, f"len({name}) <= {rule['length_max']}")
            for x in value:
                _check_scalar(entry.id, f"{name}_j", x, rule)
        else:
            _check_scalar(entry.id, name, value, rule)
        out[name] = value
    for name, rule in entry.params.items():
        other = rule.get("same_length_as")
        if other and len(out[name]) != len(out[other]):
            raise ConstraintViolation(entry.id, f"len({name}) == len({other})")
    return out


# --- constructors -----------------------------------------------------------

def _pairs(d: Sequence[int]) -> List[Block]:
    """Blocks (e_i, 0, 0), (e_i, d_i, 0) of the trailing leaves."""
    return [Block((1, 1), ((0, di), (0, 0))) for di in d]


def _exact(value_num: int, value_den: int) -> int:
    if value_num % value_den:
        raise ValueError(f"{value_num}/{value_den} is not an integer")
    return value_num // value_den


def _p5(p):
    l = p["l01"]
    return [[-l, 1, 1, 0, 0], [-l, 0, 0, 1, 1], [1, 0, 1, 0, 1], [2 * (1 - l), 2, 2, 2, 2]], (2, 1)


def _iii_series(p, extra_leaf2: bool):
    k, d0 = p["k"], p["d0"]
    leaf0 = Block(tuple(2 * kj + 1 for kj in k), (tuple(d0), tuple(-kj for kj in k)))
    leaf1 = Block((2,), ((1,), (0,)))
    if extra_leaf2:
        leaf2 = Block((2, 2), ((1, p["d2"]), (1, 1)))
    else:
        leaf2 = Block((2,), ((1,), (1,)))
    return DefiningMatrix((leaf0, leaf1, leaf2) + tuple(_pairs(p["d"]))), (2, 4)


def _p13(p):
    # one column per leaf and no pairs leaves 3 columns in 4 rows
    if len(p["k"]) + len(p["d"]) < 2:
        raise ConstraintViolation("P_13", "len(k) + len(d) >= 2")
    return _iii_series(p, extra_leaf2=False)


def _p14(p):
    if p["d2"] == 1:
        raise ConstraintViolation("P_14", "d2 != 1")
    return _iii_series(p, extra_leaf2=True)


def _p15(p):
    k = p["k"]
    return [[-2 * k, 2, 0, 0], [-2 * k, 0, 2, 0], [1, 1, 1, 2 * k + 2], [1 - k, 2, -1, 1]], (2, 2)


def _p16(p):
    k = p["k"]
    rows = [[-2 * k, 2, 0, 0, 0], [-2 * k, 0, 2, 0, 0], [1, 1, 1, 2 * k, 2 * k + 2], [1 - k, 2, -1, 1, 1]]
    return rows, (2, 2)


def _p20(p):
    k, d0 = p["k"], p["d0"]
    if len(k) + len(p["d"]) + len(p["dprime"]) < 2:
        raise ConstraintViolation("P_20", "len(k) + len(d) + len(dprime) >= 2")
    leaf0 = Block(tuple(k), (tuple(d0), tuple(1 - kj for kj in k)))
    leaf1 = Block((2,), ((1,), (0,)))
    leaf2 = Block((2,), ((1,), (2,)))
    if len(set(p["dprime"])) != len(p["dprime"]):
        raise ConstraintViolation("P_20", "lineality columns are distinct")
    lin = tuple((x, 1) for x in p["dprime"])
    return DefiningMatrix((leaf0, leaf1, leaf2) + tuple(_pairs(p["d"])), lin), (2, 2)


def _p21(p):
    k = p["k"]
    rows = [[-(2 * k + 1), 2, 0, 0], [-(2 * k + 1), 0, 2, 0], [-k, 0, 1, 1], [-4 * k, 1, 3, 2]]
    return rows, (4, 2)


def _p26(p):
    if len(set(p["dprime"])) != len(p["dprime"]):
        raise ConstraintViolation("P_26", "lineality columns are distinct")
    blocks = (Block((2,), ((1,), (0,))), Block((2,), ((1,), (2,)))) + tuple(_pairs(p["d"]))
    return DefiningMatrix(blocks, tuple((x, 1) for x in p["dprime"])), (2, 2)


def _p29(p):
    z, m0 = p["zeta"], p["m0"]
    top = 2 - m0 * z
    return [[top, 2, 0, 0], [top, 0, 1, 1], [1, 0, 0, 1], [1 + _exact(m0 * (2 - z), 2), 1, 0, 0]], (2, z)


def _p30(p):
    z = p["zeta"]
    return [[2 - 5 * z, 2, 0, 0], [2 - 5 * z, 0, 1, 1], [0, 1, 0, 1], [5, 0, 0, 0]], (2, z)


def _p31(p):
    z = p["zeta"]
    top = 4 - 3 * z
    return [[top, 4, 0, 0], [top, 0, 1, 1], [0, 1, 0, 1], [_exact(7 - 3 * z, 2), 2, 0, 0]], (2, z)


def _p32(p):
    x = 2 - 3 * p["zeta"]
    rows = [
        [x, 2, 0, 0, 0, 0],
        [x, 0, 1, 1, 0, 0],
        [x, 0, 0, 0, 1, 1],
        [0, 1, 0, 1, 0, 1],
        [3, 0, 0, 0, 0, 0],
    ]
    return rows, (2, p["zeta"])


def _p33(p):
    x = 2 - 3 * p["zeta"]
    return [[x, 2, 0, 0], [x, 0, 1, 1], [0, 1, 0, 2], [3, 0, 0, 0]], (2, p["zeta"])


def _p34(p):
    x = 2 - 3 * p["zeta"]
    return [[x, 2, 0, 0], [x, 0, 1, 1], [0, 1, 0, 1], [3, 0, 0, 0]], (2, p["zeta"])


def _p35(p):
    x = 2 - 3 * p["zeta"]
    return [[x, x, 2, 0, 0], [x, x, 0, 1, 1], [0, 1, 1, 0, 1], [3, 3, 0, 0, 0]], (2, p["zeta"])


def _p36(p):
    z = p["zeta"]
    x = 2 - 3 * z
    return [[x, 2 - z, 2, 0, 0], [x, 2 - z, 0, 1, 1], [0, 3, 1, 0, 1], [3, 1, 0, 0, 0]], (2, z)


def _mu_for(entry_id: str, p, zeta: int, k: int, target: int) -> int:
    """mu with k * mu = target mod zeta, taken from params when given."""
    if gcd(k, zeta) != 1:
        raise ConstraintViolation(entry_id, "gcd(k, zeta) = 1")
    mu = p.get("mu")
    if mu is None:
        mu = (target * pow(k, -1, zeta)) % zeta
    if (k * mu - target) % zeta:
        raise ConstraintViolation(entry_id, f"k*mu = {target} mod zeta")
    return mu


def _series_58(entry_id: str, p, extras: int):
    z, k = p["zeta"], p["k"]
    if k >= z:
        raise ConstraintViolation(entry_id, "k < zeta")
    if extras and 2 * k >= z:
        raise ConstraintViolation(entry_id, "2k < zeta")
    mu = _mu_for(entry_id, p, z, k, -1)
    if gcd(2, z, mu) != 1:
        raise ConstraintViolation(entry_id, "gcd(2, zeta, mu) = 1")
    q = (k * mu + 1) // z
    lead = 2 * (q - mu)
    extra_last = 2 * q - mu
    if extras == 0:
        leaf0 = Block((2 * (z - k),), ((1,), (lead,)))
    elif extras == 1:
        # d11 sits on the second leaf-0 column as in the three-column series
        leaf0 = Block((2 * (z - k), z - 2 * k), ((1, p["d11"]), (lead, extra_last)))
    else:
        if p["d12"] < 2 + k * sum(p["d"]):
            raise ConstraintViolation(entry_id, "d12 >= 2 + k * sum(d)")
        leaf0 = Block(
            (2 * (z - k), z - 2 * k, z - 2 * k),
            ((1, p["d11"], p["d12"]), (lead, extra_last, extra_last)),
        )
    leaf1 = Block((2 * k,), ((1,), (2 * q,)))
    return DefiningMatrix((leaf0, leaf1) + tuple(_pairs(p["d"]))), (2, z)


def _p37(p):
    return _series_58("P_37", p, 0)


def _p38(p):
    return _series_58("P_38", p, 1)


def _p39(p):
    return _series_58("P_39", p, 2)


def _zeta_5_mod_6(shape: str) -> Callable:
    def build(p):
        z = p["zeta"]
        x, y = 2 - 2 * z, 4 - z
        rows = {
            "40": [[x, 2, 0, 0, 0, 0], [x, 0, 1, 1, 0, 0], [x, 0, 0, 0, 1, 1], [1, 0, 0, 1, 0, 1], [y, 1, 0, 0, 0, 0]],
            "41": [[x, 2, 0, 0], [x, 0, 1, 1], [1, 0, 0, 2], [y, 1, 0, 0]],
            "42": [[x, 2, 0, 0], [x, 0, 1, 1], [1, 0, 0, 1], [y, 1, 0, 0]],
            "43": [[x, 2, 0, 0], [x, 0, 1, 1], [2, 0, 0, 1], [y, 1, 0, 0]],
            "44": [[x, x, 2, 0, 0], [x, x, 0, 1, 1], [1, 2, 0, 0, 1], [y, y, 1, 0, 0]],
            "45": [[x, x, 2, 2, 0, 0], [x, x, 0, 0, 1, 1], [1, 2, 0, 1, 0, 1], [y, y, 1, 1, 0, 0]],
            "46": [[x, x, 2, 0, 0], [x, x, 0, 1, 1], [1, 3, 0, 0, 1], [y, y, 1, 0, 0]],
            "47": [[x, 2, 2, 0, 0], [x, 0, 0, 1, 1], [1, 0, 1, 0, 1], [y, 1, 1, 0, 0]],
            "48": [[x, 2, 2, 0, 0], [x, 0, 0, 1, 1], [1, 0, 2, 0, 1], [y, 1, 1, 0, 0]],
            "49": [
                [x, 2 - z, 2, 0, 0],
                [x, 2 - z, 0, 1, 1],
                [1, 2, 0, 0, 1],
                [y, _exact(5 - z, 2), 1, 0, 0],
            ],
        }[shape]
        return rows, (3, z)

    return build


def _zeta_3_minus(shape: str) -> Callable:
    def build(p):
        z = p["zeta"]
        t = 3 - 2 * z
        if shape == "50":
            return [[t, 3, 0, 0], [t, 0, 1, 1], [0, 1, 0, 1], [2, 0, 0, 0]], (3, z)
        if shape == "51":
            return [[t, 3, 3, 0, 0], [t, 0, 0, 1, 1], [0, 1, 2, 0, 1], [2, 0, 0, 0, 0]], (3, z)
        w = _exact(9 - 2 * z, 3)
        u = _exact(12 - 4 * z, 3)
        rows = {
            "52": [[t, 3, 0, 0], [t, 0, 1, 1], [1, 0, 0, 1], [w, 1, 0, 0]],
            "53": [[t, 3, 3, 0, 0], [t, 0, 0, 1, 1], [1, 0, 1, 0, 1], [w, 1, 1, 0, 0]],
            "54": [[t, t, 3, 0, 0], [t, t, 0, 1, 1], [1, 2, 0, 0, 1], [w, w, 1, 0, 0]],
            "55": [[t, 3, 0, 0], [t, 0, 1, 1], [1, 0, 0, 1], [u, 2, 0, 0]],
            "56": [[t, 3, 3, 0, 0], [t, 0, 0, 1, 1], [1, 0, 1, 0, 1], [u, 2, 2, 0, 0]],
            "57": [[t, t, 3, 0, 0], [t, t, 0, 1, 1], [1, 2, 0, 0, 1], [u, u, 2, 0, 0]],
        }[shape]
        return rows, (3, z)

    return build


def _p58(p):
    z = p["zeta"]
    t = 4 - 2 * z
    return [[t, 4, 0, 0], [t, 0, 1, 1], [1, 0, 0, 1], [_exact(5 - z, 2), 1, 0, 0]], (3, z)


def _p59(p):
    z = p["zeta"]
    t = 4 - 2 * z
    return [[t, 4, 0, 0], [t, 0, 1, 1], [1, 0, 0, 1], [_exact(9 - 3 * z, 2), 3, 0, 0]], (3, z)


def _p60(p):
    z, m0 = p["zeta"], p["m0"]
    t = 1 - m0 * z
    return [[t, 1, 1, 0, 0], [t, 0, 0, 1, 1], [1, 0, 1, 0, 1], [2 * m0, 0, 0, 0, 0]], (2, z)


def _p61(p):
    z = p["zeta"]
    return [[2 - z, 2, 0, 0], [2 - z, 0, 1, 1], [-1, -1, 0, 1], [2, 0, 0, 0]], (4, z)


def _coprime_range(entry_id: str, start: int, offset: int, iota: int, name: str) -> None:
    lo, hi = sorted((start, start + offset))
    for delta in range(lo, hi + 1):
        if gcd(delta, iota) != 1:
            raise ConstraintViolation(entry_id, f"gcd(delta, iota) = 1 for delta between d_lead and d_lead + {name}")


def _series_59(entry_id: str, p, with_d0: bool, with_d1: bool):
    iota, k, l, d = p["iota"], p["k"], p["l"], p["d_lead"]
    if gcd(k, l) != 1:
        raise ConstraintViolation(entry_id, "gcd(k, l) = 1")
    zeta = k * iota + l
    mu = _mu_for(entry_id, p, zeta, k, 1)
    _coprime_range(entry_id, d, 0, iota, "0")
    last0 = iota * (1 - mu * k) // zeta
    last1 = (iota + mu * l) // zeta
    a0, a1 = [d], [d]
    if with_d0:
        if p["d0"] == 0:
            raise ConstraintViolation(entry_id, "d0 != 0")
        _coprime_range(entry_id, d, p["d0"], iota, "d0")
        a0.append(d + p["d0"])
    if with_d1:
        if p["d1"] == 0:
            raise ConstraintViolation(entry_id, "d1 != 0")
        _coprime_range(entry_id, d, p["d1"], iota, "d1")
        a1.append(d + p["d1"])
    leaf0 = Block(tuple([k * iota] * len(a0)), (tuple(a0), tuple([last0] * len(a0))))
    leaf1 = Block(tuple([l] * len(a1)), (tuple(a1), tuple([last1] * len(a1))))
    return DefiningMatrix((leaf0, leaf1) + tuple(_pairs(p["d"]))), (iota, zeta)


_BUILDERS: Dict[str, Callable] = {
    "P_5": _p5,
    "P_13": _p13,
    "P_14": _p14,
    "P_15": _p15,
    "P_16": _p16,
    "P_20": _p20,
    "P_21": _p21,
    "P_26": _p26,
    "P_29": _p29,
    "P_30": _p30,
    "P_31": _p31,
    "P_32": _p32,
    "P_33": _p33,
    "P_34": _p34,
    "P_35": _p35,
    "P_36": _p36,
    "P_37": _p37,
    "P_38": _p38,
    "P_39": _p39,
    "P_58": _p58,
    "P_59": _p59,
    "P_60": _p60,
    "P_61": _p61,
    "P_62": lambda p: _series_59("P_62", p, False, False),
    "P_63": lambda p: _series_59("P_63", p, False, True),
    "P_64": lambda p: _series_59("P_64", p, True, False),
    "P_65": lambda p: _series_59("P_65", p, True, True),
}
_BUILDERS.update({f"P_{n}": _zeta_5_mod_6(str(n)) for n in range(40, 50)})
_BUILDERS.update({f"P_{n}": _zeta_3_minus(str(n)) for n in range(50, 58)})


# --- instances --------------------------------------------------------------

@dataclass(frozen=True)
class Instance:
    entry_id: str
    params: Params
    matrix: Optional[DefiningMatrix]
    polytope: Optional[VPolytope]
    expected: Expected
    toric_case: Optional[IICase] = None


def expected_terminal(entry_id: str, params: Optional[Params] = None) -> bool:
    """
    Terminal for the toric case (iii) with m = 1, for the 59a-d series with all
    d_i = 1 and |d0|, |d1| <= 1, and where the entry says so.

    Two columns of one leaf that differ by d0 in the penultimate row leave
    |d0| - 1 lattice points between them on the anticanonical plane.
    """
    entry = get_entry(entry_id)
    params = params or {}
    if entry.expect and "terminal" in entry.expect:
        return bool(entry.expect["terminal"])
    if entry.id == "toric_iii":
        return params.get("m") == 1
    if entry.id in ("P_62", "P_63", "P_64", "P_65"):
        steps = [abs(params[name]) for name in ("d0", "d1") if name in params]
        return all(x == 1 for x in params.get("d", ())) and all(s == 1 for s in steps)
    return False


def expected_canonical(entry: CatalogEntry) -> bool:
    if entry.expect and "canonical" in entry.expect:
        return bool(entry.expect["canonical"])
    return entry.kind != "control"


def build(entry_id: str, params: Optional[Params] = None) -> Instance:
    entry = get_entry(entry_id)
    params = check_params(entry, params if params is not None else entry.smallest)
    if entry.kind == "toric":
        c = IICase(entry.case, **{k: v for k, v in params.items()})
        expected = Expected(entry.case, iota=c.index, terminal=c.is_terminal)
        return Instance(entry.id, params, None, ii_polytope(c), expected, toric_case=c)
    if entry.rows is not None:
        matrix = DefiningMatrix.from_matrix(entry.rows)
        exp = entry.expect or {}
        iota, zeta = exp.get("iota"), exp.get("zeta")
    else:
        built, (iota, zeta) = _BUILDERS[entry.id](params)
        matrix = built if isinstance(built, DefiningMatrix) else DefiningMatrix.from_matrix(built)
    expected = Expected(
        case=entry.case,
        iota=iota,
        zeta=zeta,
        canonical=expected_canonical(entry),
        terminal=expected_terminal(entry.id, params),
    )
    return Instance(entry.id, params, matrix, None, expected)


def instantiate(entry_id: str, params: Optional[Params] = None) -> Union[DefiningMatrix, VPolytope]:
    """
    The defining matrix or polytope of a catalog entry.

    Args:
        entry_id: id or alias, e.g. "P_13", "56a", "toric_iv"
        params: parameter values; the first grid point when omitted

    Returns:
        DefiningMatrix for matrix entries and controls, VPolytope for toric entries

    Raises:
        ConstraintViolation: params break a constraint of the entry
    """
    inst = build(entry_id, params)
    return inst.matrix if inst.matrix is not None else inst.polytope


# --- verification -----------------------------------------------------------

@dataclass
class EntryResult:
    entry_id: str
    params: Params
    status: str = PASS
    case: Optional[str] = None
    iota: Optional[int] = None
    zeta: Optional[int] = None
    class_group: Optional[str] = None
    canonical: Optional[bool] = None
    terminal: Optional[bool] = None
    anticanonical_order: Optional[int] = None
    witnesses: List[Tuple] = field(default_factory=list)
    messages: List[str] = field(default_factory=list)
    seconds: float = 0.0

    def fail(self, message: str) -> None:
        self.status = FAIL
        self.messages.append(message)


@dataclass
class VerificationReport:
    results: List[EntryResult] = field(default_factory=list)
    seconds: float = 0.0

    @property
    def passed(self) -> bool:
        return all(r.status == PASS for r in self.results)

    @property
    def failures(self) -> List[EntryResult]:
        return [r for r in self.results if r.status != PASS]

    def counts(self) -> Dict[str, int]:
        return {
            "total": len(self.results),
            "passed": sum(r.status == PASS for r in self.results),
            "failed": len(self.failures),
        }


def _verify_matrix(inst: Instance, result: EntryResult, witness: Optional[Tuple[int, ...]]) -> None:
    P = inst.matrix
    ensure_valid(P)
    info = normal_form_info(P)
    result.case, result.iota, result.zeta = info.case, info.iota, info.zeta
    exp = inst.expected
    if (info.case, info.iota, info.zeta) != (exp.case, exp.iota, exp.zeta):
        result.fail(f"normal form {(info.case, info.iota, info.zeta)} != expected {(exp.case, exp.iota, exp.zeta)}")
    v = verdict(P)
    result.canonical, result.terminal = v.canonical, v.terminal
    result.witnesses = [witness_in_global(P, w) for w in v.witnesses]
    if v.canonical != exp.canonical:
        result.fail(f"canonical = {v.canonical}, expected {exp.canonical}")
    if exp.canonical and v.terminal != exp.terminal:
        result.fail(f"terminal = {v.terminal}, expected {exp.terminal}")
    if witness is not None and tuple(witness) not in [tuple(w) for w in result.witnesses]:
        result.fail(f"witness {tuple(witness)} not found")
    group, Q = class_group(P)
    result.class_group = group.describe()
    order = anticanonical_class(P, Q).order
    result.anticanonical_order = order
    if order != info.iota:
        logger.info("%s %s: order of K_X is %s, normal form gives iota = %d", inst.entry_id, inst.params, order, info.iota)


def _verify_toric(inst: Instance, result: EntryResult) -> None:
    c = inst.toric_case
    canonical = is_canonical_polytope(inst.polytope).holds
    terminal = is_terminal_polytope(inst.polytope).holds
    result.case, result.iota = c.case, c.index
    result.canonical, result.terminal = canonical, terminal
    if not canonical:
        result.fail("polytope is not canonical")
    if terminal != inst.expected.terminal:
        result.fail(f"terminal = {terminal}, expected {inst.expected.terminal}")
    group, Q = class_group(toric_matrix(c))
    result.class_group = group.describe()
    exp = ii_class_group_expected(c)
    exp_group = ClassGroup(exp.free_rank, exp.torsion)
    if group != exp_group:
        result.fail(f"class group {group.describe()} != expected {exp_group.describe()}")
    elif not equivalent_gradings(DegreeMatrix(exp.degrees, exp_group), Q, group):
        result.fail(f"degree matrix {Q.rows} is not equivalent to {exp.degrees}")


def verify_instance(entry_id: str, params: Optional[Params] = None) -> EntryResult:
    """Verify one catalog point; failures are reported, never raised."""
    start = time.perf_counter()
    entry = get_entry(entry_id)
    result = EntryResult(entry.id, dict(params if params is not None else entry.smallest))
    try:
        inst = build(entry.id, params)
        if inst.matrix is not None:
            _verify_matrix(inst, result, entry.witness)
        else:
            _verify_toric(inst, result)
    except (ValueError, NotInNormalFormError) as e:
        result.fail(str(e))
    result.seconds = time.perf_counter() - start
    logger.debug("%s %s: %s", result.entry_id, result.params, result.status)
    return result


def verify_toric_case(c: IICase) -> EntryResult:
    """Verify a toric case polytope outside the catalog grids."""
    start = time.perf_counter()
    params = {k: v for k, v in (("n", c.n), ("m", c.m), ("index", c.index)) if v}
    result = EntryResult(f"toric_{c.case}", params)
    try:
        expected = Expected(c.case, iota=c.index, terminal=c.is_terminal)
        inst = Instance(result.entry_id, params, None, ii_polytope(c), expected, toric_case=c)
        _verify_toric(inst, result)
    except ValueError as e:
        result.fail(str(e))
    result.seconds = time.perf_counter() - start
    return result


def _verify_task(task: Tuple[str, Params]) -> EntryResult:
    return verify_instance(*task)


def _matches(entry: CatalogEntry, selector: Optional[str]) -> bool:
    if not selector:
        return True
    if selector in ENTRY_KINDS:
        return entry.kind == selector
    try:
        return resolve_id(selector) == entry.id
    except ValueError:
        return entry.id.startswith(selector)


def verify_all(filter: Optional[str] = None, workers: int = 1) -> VerificationReport:
    """
    Verify every grid point of every selected entry.

    Args:
        filter: entry id, alias, kind ("matrix", "toric", "control") or id prefix; all when None
        workers: process workers; results are in catalog order either way

    Returns:
        VerificationReport
    """
    start = time.perf_counter()
    tasks = [(e.id, dict(p)) for e in list_entries() if _matches(e, filter) for p in e.grid]
    logger.info("verifying %d catalog points with %d worker(s)", len(tasks), workers)
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_verify_task, tasks))
    else:
        results = [_verify_task(t) for t in tasks]
    return VerificationReport(results, time.perf_counter() - start)
