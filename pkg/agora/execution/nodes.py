"""
Node executors
A node executor is the adapter the execution manager drives in one region.
"""

import math
from typing import Iterable, List, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, field_validator

from agora.assets.codec import read_documents
from agora.models.money import Money
from agora.models.pricing import PayPerUse, UsageUnit
from agora.models.regions import Region

from .certificates import Certificate

NODE_PRICE_UNITS = (UsageUnit.PER_HOUR, UsageUnit.PER_MEGABYTE)


class NodeExecutorInfo(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    node_id: str = Field(min_length=1)
    region: Region
    capabilities: Tuple[str, ...] = ()
    certificates: Tuple[Certificate, ...] = ()
    price: PayPerUse
    speed_factor: float = Field(default=1.0, gt=0)

    @field_validator("capabilities")
    @classmethod
    def _capabilities(cls, value: Tuple[str, ...]) -> Tuple[str, ...]:
        return tuple(sorted(set(value)))

    @field_validator("price")
    @classmethod
    def _node_price(cls, value: PayPerUse) -> PayPerUse:
        if value.metric not in NODE_PRICE_UNITS:
            raise ValueError("node price must be per hour or per megabyte")
        if value.rate.micro_units < 0:
            raise ValueError("node price must be non-negative")
        return value

    @field_validator("speed_factor")
    @classmethod
    def _finite(cls, value: float) -> float:
        if not math.isfinite(value):
            raise ValueError("speed_factor must be finite")
        return value

    def has_capability(self, capability: Union[str, None]) -> bool:
        return capability is None or capability in self.capabilities


def load_node_registry(path: str) -> List[NodeExecutorInfo]:
    """Newline-delimited NodeExecutorInfo documents, in file order."""
    return read_documents(path, NodeExecutorInfo)


def default_nodes(regions: Iterable[Region]) -> List[NodeExecutorInfo]:
    """One free relational node per region, for runs without a node registry."""
    return [
        NodeExecutorInfo(
            node_id=f"node-{region.value.lower()}",
            region=region,
            capabilities=("relational",),
            price=PayPerUse(rate=Money.zero(), metric=UsageUnit.PER_HOUR),
        )
        for region in sorted(set(regions), key=lambda r: r.value)
    ]
