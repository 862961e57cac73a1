# tools/serialization.py
"""
JSON number policy and the input/output schemas of the command-line front end.

Integers travel as decimal strings and rationals as "p/q" strings, so no value
ever passes through a float. Every emitted object carries "schema_version".
"""

import json
from dataclasses import fields, is_dataclass
from fractions import Fraction
from typing import Any, Dict, List, Optional

from pydantic import BaseModel, BeforeValidator, ConfigDict, Field, ValidationError, field_validator, model_validator
from typing_extensions import Annotated

from geometry.exact import format_rat, integer, rat
from geometry.kempty import LatticeTriangle
from geometry.polytope import VPolytope
from singularities.cplxone import LINEALITY, Block, DefiningMatrix, LeafPoint, witness_in_global

SCHEMA_VERSION = "1"


def _parse_int(value: Any) -> int:
    if isinstance(value, bool):
        raise ValueError("booleans are not integers")
    return integer(value)


def _parse_rat(value: Any) -> Fraction:
    if isinstance(value, float):
        raise ValueError("floats are not accepted, use a \"p/q\" string")
    return rat(value)


IntStr = Annotated[int, BeforeValidator(_parse_int)]
RatStr = Annotated[Fraction, BeforeValidator(_parse_rat)]


# --- input schemas ----------------------------------------------------------

class BlockInput(BaseModel):
    """One column block: exponents l and the 2 x n_i data block d."""
    l: List[IntStr]
    d: List[List[IntStr]]

    @model_validator(mode="after")
    def _shape(self) -> "BlockInput":
        if len(self.d) != 2 or any(len(row) != len(self.l) for row in self.d):
            raise ValueError(f"d must be 2 x {len(self.l)}")
        return self

    def to_block(self) -> Block:
        return Block(tuple(self.l), (tuple(self.d[0]), tuple(self.d[1])))


class MatrixInput(BaseModel):
    """
    A defining matrix, either block-wise {"r", "blocks", "dprime"} or as plain
    {"rows"} with optional "block_sizes" and "m".
    """
    r: Optional[IntStr] = None
    blocks: Optional[List[BlockInput]] = None
    dprime: List[List[IntStr]] = Field(default_factory=list)
    rows: Optional[List[List[IntStr]]] = None
    block_sizes: Optional[List[IntStr]] = None
    m: Optional[IntStr] = None

    @model_validator(mode="after")
    def _one_form(self) -> "MatrixInput":
        if (self.blocks is None) == (self.rows is None):
            raise ValueError("give exactly one of 'blocks' and 'rows'")
        if self.blocks is not None and self.r is not None and len(self.blocks) != self.r + 1:
            raise ValueError(f"r = {self.r} needs {self.r + 1} blocks, got {len(self.blocks)}")
        if any(len(v) != 2 for v in self.dprime):
            raise ValueError("dprime entries are 2-vectors")
        return self

    def to_defining_matrix(self) -> DefiningMatrix:
        if self.rows is not None:
            return DefiningMatrix.from_matrix(self.rows, self.block_sizes, self.m)
        return DefiningMatrix(tuple(b.to_block() for b in self.blocks), tuple(tuple(v) for v in self.dprime))


class PolytopeInput(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    d: int
    vertices: List[List[RatStr]]

    @field_validator("d", mode="before")
    @classmethod
    def _dimension(cls, value: Any) -> int:
        return _parse_int(value)

    @model_validator(mode="after")
    def _lengths(self) -> "PolytopeInput":
        if not self.vertices:
            raise ValueError("a polytope needs at least one vertex")
        if any(len(v) != self.d for v in self.vertices):
            raise ValueError(f"every vertex needs {self.d} coordinates")
        return self

    def to_polytope(self) -> VPolytope:
        return VPolytope.from_points(self.vertices, self.d)


class TriangleInput(BaseModel):
    k: IntStr
    vertices: List[List[IntStr]]

    @model_validator(mode="after")
    def _shape(self) -> "TriangleInput":
        if self.k < 1:
            raise ValueError("k must be a positive integer")
        if len(self.vertices) != 3 or any(len(v) != 2 for v in self.vertices):
            raise ValueError("a triangle is three integer 2-points")
        return self

    def to_triangle(self) -> LatticeTriangle:
        return LatticeTriangle.from_points(self.vertices)


class TrianglePairInput(BaseModel):
    k: IntStr
    first: List[List[IntStr]]
    second: List[List[IntStr]]

    def triangles(self) -> List[LatticeTriangle]:
        return [LatticeTriangle.from_points(self.first), LatticeTriangle.from_points(self.second)]


class SnfInput(BaseModel):
    matrix: List[List[IntStr]]

    @field_validator("matrix")
    @classmethod
    def _rectangular(cls, value: List[List[int]]) -> List[List[int]]:
        if not value or not value[0] or len({len(row) for row in value}) != 1:
            raise ValueError("matrix must be a non-empty rectangular integer matrix")
        return value


class ReportEnvelope(BaseModel):
    """Saved report file: the command, its outcome and the payload it printed."""
    schema_version: str = SCHEMA_VERSION
    command: str
    success: bool
    timestamp: Optional[str] = None
    result: Dict[str, Any] = Field(default_factory=dict)

    def to_json(self) -> str:
        data = {"schema_version": self.schema_version, "command": self.command, "success": self.success, "result": self.result}
        if self.timestamp is not None:
            data["timestamp"] = self.timestamp
        return dumps(data)


def parse_input(model: type, text: str) -> BaseModel:
    """Parse JSON text into a schema model; raises ValueError or ValidationError."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ValueError(f"Input is not valid JSON: {e}")
    return model.model_validate(data)


def describe_validation_error(error: ValidationError) -> str:
    parts = []
    for err in error.errors():
        where = ".".join(str(x) for x in err.get("loc", ())) or "input"
        parts.append(f"{where}: {err.get('msg')}")
    return "; ".join(parts)


# --- number policy ----------------------------------------------------------

def encode(value: Any) -> Any:
    """Recursively apply the number policy; dataclasses become dicts."""
    if value is None or isinstance(value, (bool, str)):
        return value
    if isinstance(value, int):
        return str(value)
    if isinstance(value, Fraction):
        return format_rat(value)
    if isinstance(value, float):
        raise TypeError("floats are not part of the JSON number policy")
    if isinstance(value, dict):
        return {str(k): encode(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [encode(v) for v in value]
    if is_dataclass(value):
        return {f.name: encode(getattr(value, f.name)) for f in fields(value)}
    raise TypeError(f"Cannot encode {type(value).__name__}")


def dumps(payload: Any) -> str:
    return json.dumps(encode(payload), indent=2, ensure_ascii=False, sort_keys=True)


def with_schema(payload: Dict[str, Any]) -> Dict[str, Any]:
    return {**payload, "schema_version": SCHEMA_VERSION}


def error_json(message: str, command: str = "") -> str:
    payload = {"error": message, "success": False}
    if command:
        payload["command"] = command
    return dumps(with_schema(payload))


# --- domain objects ---------------------------------------------------------

def matrix_to_json(P: DefiningMatrix) -> Dict[str, Any]:
    return {
        "r": P.r,
        "blocks": [{"l": list(b.l), "d": [list(b.d[0]), list(b.d[1])]} for b in P.blocks],
        "dprime": [list(v) for v in P.lineality],
        "rows": P.to_matrix(),
    }


def leaf_point_to_json(P: DefiningMatrix, p: LeafPoint) -> Dict[str, Any]:
    return {
        "leaf": p.leaf if p.leaf == LINEALITY else str(p.leaf),
        "local": list(p.coords),
        "point": list(witness_in_global(P, p)),
    }


def polytope_to_json(P: VPolytope) -> Dict[str, Any]:
    return {"d": P.d, "vertices": [list(v) for v in P.vertices]}


def render_text(payload: Dict[str, Any], indent: int = 0) -> str:
    """Plain key: value rendering for --report text."""
    lines = []
    pad = "  " * indent
    for key in sorted(payload):
        value = encode(payload[key])
        if isinstance(value, dict):
            lines.append(f"{pad}{key}:")
            lines.append(render_text(value, indent + 1))
        elif isinstance(value, list) and value and isinstance(value[0], dict):
            lines.append(f"{pad}{key}: ({len(value)})")
            for item in value:
                lines.append(render_text(item, indent + 1))
                lines.append(f"{pad}  -")
        else:
            lines.append(f"{pad}{key}: {json.dumps(value, ensure_ascii=False)}")
    return "\n".join(line for line in lines if line)
