"""
Asset descriptors
Data sources, algorithms, pipelines, systems, compute/storage nodes and
applications all share one descriptor shape.
"""

from enum import Enum
from fractions import Fraction
from typing import Annotated, Any, Optional, Tuple, Union

from pydantic import BaseModel, BeforeValidator, ConfigDict, Field, PlainSerializer, field_validator

from .constraints import UsageConstraint
from .pricing import PricingModel
from .regions import Region

GOAL_TAXONOMY: Tuple[str, ...] = (
    "aggregation",
    "anomaly-detection",
    "classification",
    "clustering",
    "compute",
    "data-cleaning",
    "data-source",
    "dimensionality-reduction",
    "feature-encoding",
    "feature-engineering",
    "filter",
    "forecasting",
    "imputation",
    "join",
    "projection",
    "recommendation",
    "regression",
    "scan",
    "storage",
    "visualization",
)

MAX_ID_LENGTH = 128
MAX_SHARE_DEPTH = 8


class AssetKind(str, Enum):
    DATA_SOURCE = "data_source"
    ALGORITHM = "algorithm"
    PIPELINE = "pipeline"
    SYSTEM = "system"
    COMPUTE_NODE = "compute_node"
    STORAGE_NODE = "storage_node"
    APPLICATION = "application"


REGIONAL_KINDS = frozenset({AssetKind.DATA_SOURCE, AssetKind.COMPUTE_NODE, AssetKind.STORAGE_NODE})


class ColumnType(str, Enum):
    INT64 = "Int64"
    FLOAT64 = "Float64"
    TEXT = "Text"
    BOOL = "Bool"
    DATE = "Date"


class Column(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    name: str
    type: ColumnType


class Schema(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    columns: Tuple[Column, ...] = ()

    def __str__(self) -> str:
        return "(" + ", ".join(f"{c.name} {c.type.value}" for c in self.columns) + ")"


# A schema, or a category string such as "price-estimate"
TypeRef = Union[Schema, str]


def describe_type(ref: TypeRef) -> str:
    return str(ref) if isinstance(ref, Schema) else ref


class LogicalSignature(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    goal: str
    input_types: Tuple[TypeRef, ...] = ()
    output_type: TypeRef


class QualityMetric(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    name: str
    value: float
    unit: str = ""


class CertificateRequirement(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    property: str
    trusted_authorities: Tuple[str, ...] = ()

    @field_validator("trusted_authorities")
    @classmethod
    def _sorted(cls, value: Tuple[str, ...]) -> Tuple[str, ...]:
        return tuple(sorted(set(value)))


def _to_fraction(value: Any) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise ValueError("share must be a rational number")
    if isinstance(value, (int, float, str)):
        try:
            return Fraction(str(value).strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise ValueError(f"not a rational share: {value!r}") from exc
    raise ValueError(f"not a rational share: {value!r}")


Rational = Annotated[
    Fraction,
    BeforeValidator(_to_fraction),
    PlainSerializer(lambda f: str(f), return_type=str),
]


class RevenueShareTree(BaseModel):
    """Beneficiary with a rational share; only leaves receive money."""

    model_config = ConfigDict(frozen=True, extra="forbid", arbitrary_types_allowed=True)

    beneficiary: str
    share: Rational = Fraction(1)
    children: Tuple["RevenueShareTree", ...] = ()

    def depth(self) -> int:
        return 1 + max((c.depth() for c in self.children), default=0)

    def leaves(self) -> Tuple[str, ...]:
        if not self.children:
            return (self.beneficiary,)
        return tuple(b for c in self.children for b in c.leaves())


RevenueShareTree.model_rebuild()


class PipelineNode(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    node_id: str
    asset_ref: str
    role_category: str


class PipelineEdge(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    from_node: str
    from_output_index: int = 0
    to_node: str
    to_input_index: int = 0

    def __str__(self) -> str:
        return f"{self.from_node}[{self.from_output_index}]->{self.to_node}[{self.to_input_index}]"


class PipelineGraph(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    nodes: Tuple[PipelineNode, ...] = ()
    edges: Tuple[PipelineEdge, ...] = ()

    def node(self, node_id: str) -> Optional[PipelineNode]:
        return next((n for n in self.nodes if n.node_id == node_id), None)


class AssetDescriptor(BaseModel):
    """The unified record every marketplace stores"""

    model_config = ConfigDict(frozen=True, extra="forbid")

    id: str = Field(..., description="URL-safe identifier, unique within a catalog")
    kind: AssetKind
    name: str
    provider: str
    version: str = "1.0.0"
    signature: LogicalSignature
    quality: Tuple[QualityMetric, ...] = ()
    pricing: PricingModel
    usage_constraints: Tuple[UsageConstraint, ...] = ()
    required_certificates: Tuple[CertificateRequirement, ...] = ()
    region: Optional[Region] = None
    revenue_share: Optional[RevenueShareTree] = None
    graph: Optional[PipelineGraph] = None

    def metric(self, name: str) -> Optional[QualityMetric]:
        return next((q for q in self.quality if q.name == name), None)
