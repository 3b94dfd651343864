"""Pydantic schemas for space/operator descriptors and report records."""

import json
from datetime import datetime
from pathlib import Path
from typing import Annotated, Any, Literal, Optional, Union

from pydantic import BaseModel, Field, TypeAdapter, field_validator

from bilinorm.bilinear import BUILTIN_OPERATORS, BilinearOperator, builtin_operator
from bilinorm.config import Tolerances
from bilinorm.decision import Decision, Verdict, to_jsonable
from bilinorm.product import ProductSpace
from bilinorm.spaces import PolyhedralSpace, Space, Vector, as_vector, lp_space


class LpSpec(BaseModel):
    """l_p^dim; p is a real >= 1 or "inf"."""

    kind: Literal["lp"] = "lp"
    p: Union[Literal["inf"], float]
    dim: int = Field(ge=1)

    def build(self) -> Space:
        return lp_space(self.p, self.dim)


class PolyhedralSpec(BaseModel):
    """Polyhedral norm max |g(x)| over the facets and their negations."""

    kind: Literal["polyhedral"] = "polyhedral"
    facets: list[list[float]] = Field(min_length=1)

    def build(self) -> Space:
        return PolyhedralSpace.from_facets(self.facets)


class ProductSpec(BaseModel):
    """X x Y under the max norm."""

    kind: Literal["product"] = "product"
    left: "SpaceSpec"
    right: "SpaceSpec"

    def build(self) -> Space:
        return ProductSpace(self.left.build(), self.right.build())


SpaceSpec = Annotated[
    Union[LpSpec, PolyhedralSpec, ProductSpec], Field(discriminator="kind")
]
ProductSpec.model_rebuild()

_SPACE_ADAPTER: TypeAdapter = TypeAdapter(SpaceSpec)


class OperatorSpec(BaseModel):
    """Bilinear operator: three spaces and the coefficient tensor c[i][j][l]."""

    X: SpaceSpec
    Y: SpaceSpec
    Z: SpaceSpec
    coeffs: list[list[list[float]]]

    def build(self) -> BilinearOperator:
        return BilinearOperator.from_coeffs(
            self.X.build(), self.Y.build(), self.Z.build(), self.coeffs
        )


# ============================================================================
# Parsing
# ============================================================================


def parse_space(text: str) -> Space:
    """Parse a space from JSON or the compact syntax.

    Compact forms: ``lp:<p>:<dim>`` (p may be ``inf``), ``cube:<dim>``,
    ``cross:<dim>`` and ``product(<space>,<space>)``.

    Raises:
        ValueError: On malformed input (pydantic ``ValidationError`` included)
    """
    text = text.strip()
    if text.startswith("{"):
        return _SPACE_ADAPTER.validate_json(text).build()
    return _parse_compact(text)


def _parse_compact(text: str) -> Space:
    text = text.strip()
    if text.startswith("product(") and text.endswith(")"):
        left, right = _split_top_level(text[len("product(") : -1])
        return ProductSpace(_parse_compact(left), _parse_compact(right))

    parts = text.split(":")
    try:
        if parts[0] == "lp" and len(parts) == 3:
            return lp_space(parts[1], int(parts[2]))
        if parts[0] == "cube" and len(parts) == 2:
            return PolyhedralSpace.cube(int(parts[1]))
        if parts[0] == "cross" and len(parts) == 2:
            return PolyhedralSpace.cross_polytope(int(parts[1]))
    except ValueError as e:
        raise ValueError(f"Cannot parse space '{text}': {e}") from e
    raise ValueError(f"Cannot parse space '{text}'")


def _split_top_level(body: str) -> tuple[str, str]:
    """Split ``a,b`` at the single comma outside parentheses."""
    depth = 0
    for k, ch in enumerate(body):
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        elif ch == "," and depth == 0:
            return body[:k], body[k + 1 :]
    raise ValueError(f"Expected two comma-separated factors in 'product({body})'")


def parse_vector(text: str, dim: Optional[int] = None) -> Vector:
    """Parse ``1,-2.5,3`` or a JSON list into a vector."""
    text = text.strip()
    try:
        if text.startswith("["):
            values = json.loads(text)
        else:
            values = [float(v) for v in text.split(",")]
    except (ValueError, json.JSONDecodeError) as e:
        raise ValueError(f"Cannot parse vector '{text}': {e}") from e
    return as_vector(values, dim)


def parse_operator(text: str) -> BilinearOperator:
    """Parse a builtin name, a JSON operator or a path to a JSON file."""
    text = text.strip()
    if text in BUILTIN_OPERATORS:
        return builtin_operator(text)
    if not text.startswith("{"):
        path = Path(text)
        if not path.is_file():
            raise ValueError(
                f"'{text}' is neither a builtin ({', '.join(sorted(BUILTIN_OPERATORS))}),"
                " JSON, nor a readable file"
            )
        text = path.read_text()
    return OperatorSpec.model_validate_json(text).build()


# ============================================================================
# Reports
# ============================================================================


class CheckRecord(BaseModel):
    """One line of a JSON report."""

    suite: Optional[str] = None
    check: str
    claim: str
    verdict: Verdict
    witnesses: dict[str, Any] = Field(default_factory=dict)
    residuals: dict[str, float] = Field(default_factory=dict)
    tolerances: dict[str, float] = Field(default_factory=dict)
    runtime_ms: Optional[float] = None
    timestamp: Optional[datetime] = None

    @field_validator("witnesses", mode="before")
    @classmethod
    def plain_witnesses(cls, v: Any) -> Any:
        """Convert numpy values nested in witnesses."""
        return to_jsonable(v)

    @classmethod
    def from_decision(
        cls,
        check: str,
        claim: str,
        decision: Decision,
        tolerances: Tolerances,
        runtime_ms: Optional[float] = None,
        residuals: Optional[dict[str, float]] = None,
        suite: Optional[str] = None,
    ) -> "CheckRecord":
        witnesses = dict(decision.witnesses)
        if decision.reason:
            witnesses["reason"] = decision.reason
        return cls(
            suite=suite,
            check=check,
            claim=claim,
            verdict=decision.verdict,
            witnesses=witnesses,
            residuals={k: float(v) for k, v in (residuals or {}).items()},
            tolerances=tolerances.model_dump(),
            runtime_ms=runtime_ms,
        )

    def to_json_line(self, timestamps: bool = True) -> str:
        """Compact JSON; without timestamps the line is reproducible byte for byte."""
        exclude = None if timestamps else {"runtime_ms", "timestamp"}
        return self.model_dump_json(exclude=exclude)

