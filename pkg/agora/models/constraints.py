"""
Usage constraints on assets and compliance policies on data movement
"""

from typing import Annotated, Literal, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from .regions import ANY_REGION, Region


class NoOverlay(BaseModel):
    """The asset's data may not be joined or combined with other data."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    kind: Literal["no_overlay"] = "no_overlay"


class VendorDeny(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    kind: Literal["vendor_deny"] = "vendor_deny"
    consumers: Tuple[str, ...] = ()

    @field_validator("consumers")
    @classmethod
    def _sorted(cls, value: Tuple[str, ...]) -> Tuple[str, ...]:
        return tuple(sorted(set(value)))


class NoCrossProviderAggregation(BaseModel):
    """An aggregation may not mix this asset with assets of other providers."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    kind: Literal["no_cross_provider_aggregation"] = "no_cross_provider_aggregation"


UsageConstraint = Annotated[
    Union[NoOverlay, VendorDeny, NoCrossProviderAggregation], Field(discriminator="kind")
]


class DenyShip(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    kind: Literal["deny_ship"] = "deny_ship"
    origin: Region
    destination: Union[Region, Literal["ANY"]]

    @model_validator(mode="after")
    def _not_degenerate(self) -> "DenyShip":
        if self.destination == self.origin:
            raise ValueError("DENY SHIP from a region to itself is degenerate")
        return self

    def __str__(self) -> str:
        return f"DENY SHIP FROM {self.origin.value} TO {_region_text(self.destination)}"


class AggregatedOnly(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    kind: Literal["aggregated_only"] = "aggregated_only"
    origin: Region

    def __str__(self) -> str:
        return f"ALLOW ONLY AGGREGATED FROM {self.origin.value}"


CompliancePolicy = Annotated[Union[DenyShip, AggregatedOnly], Field(discriminator="kind")]


def _region_text(region: Union[Region, str]) -> str:
    return region.value if isinstance(region, Region) else ANY_REGION
