"""
Usage events and windowed counters
"""

from enum import Enum
from typing import Optional

from pydantic import BaseModel, ConfigDict, Field


class UsageMetric(str, Enum):
    CALLS = "calls"
    ROWS = "rows"
    BYTES = "bytes"
    SECONDS = "seconds"


class UsageEvent(BaseModel):
    """One metered observation reported by a node executor"""

    model_config = ConfigDict(frozen=True, extra="forbid")

    asset: str = Field(..., min_length=1, description="Asset the usage is billed to")
    metric: UsageMetric
    amount: int = Field(..., ge=0, le=2**63 - 1)
    at: int = Field(..., description="Timestamp in seconds")
    node: str = Field(..., min_length=1, description="Reporting node id")
    event_id: Optional[str] = Field(None, description="Idempotence key")


class AggregatedCounter(BaseModel):
    model_config = ConfigDict(frozen=True)

    window_start: int
    window_end: int
    asset: str
    metric: UsageMetric
    total: int = Field(..., ge=0)
