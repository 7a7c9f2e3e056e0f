"""
Declarative matchmaking
Finds single assets and depth-2 compositions (one data asset feeding one
algorithm) that satisfy a consumer request, and ranks them by a weighted
sum of quality slack and price.
"""

import math
import re
from enum import Enum
from typing import List, Optional, Sequence, Set, Tuple

import structlog
from pydantic import BaseModel, ConfigDict, Field, field_validator

from agora.assets.composition import compose_pipeline
from agora.assets.signature import same_type
from agora.errors import CompositionError
from agora.models.assets import AssetDescriptor, AssetKind, PipelineGraph, TypeRef
from agora.models.money import MICRO, Money
from agora.models.pricing import nominal_price

from .index import MarketIndex, tokenize

logger = structlog.get_logger(__name__)

BOUND_PATTERN = re.compile(r"^\s*([A-Za-z0-9_.-]+)\s*(<=|>=)\s*([-+0-9.eE]+)\s*$")


class BoundKind(str, Enum):
    MAX = "max"
    MIN = "min"


class QualityBound(BaseModel):
    model_config = ConfigDict(frozen=True)

    metric: str
    kind: BoundKind
    value: float

    @field_validator("value")
    @classmethod
    def _finite(cls, value: float) -> float:
        if not math.isfinite(value):
            raise ValueError("bounds must be finite")
        return value

    @classmethod
    def parse(cls, text: str) -> "QualityBound":
        """Parse "mae<=5000" or "accuracy>=0.9"."""
        match = BOUND_PATTERN.match(text)
        if not match:
            raise ValueError(f"not a quality bound: {text!r}")
        name, op, value = match.groups()
        return cls(metric=name, kind=BoundKind.MAX if op == "<=" else BoundKind.MIN, value=value)

    def holds(self, observed: float) -> bool:
        if self.kind == BoundKind.MAX:
            return observed <= self.value
        return observed >= self.value

    def slack(self, observed: float) -> float:
        """Relative distance from the bound, 0 when tight."""
        gap = self.value - observed if self.kind == BoundKind.MAX else observed - self.value
        return gap / max(abs(self.value), 1.0)


class Request(BaseModel):
    model_config = ConfigDict(frozen=True)

    goal: str = Field(..., min_length=1)
    required_output: Optional[TypeRef] = None
    quality_bounds: Tuple[QualityBound, ...] = ()
    budget: Optional[Money] = None
    keywords: Tuple[str, ...] = ()


class MatchWeights(BaseModel):
    model_config = ConfigDict(frozen=True)

    quality: float = Field(0.5, ge=0.0, le=1.0)
    price: float = Field(0.5, ge=0.0, le=1.0)


class MatchEntry(BaseModel):
    model_config = ConfigDict(frozen=True)

    key: str = Field(..., description="Asset id, or data+algorithm ids for compositions")
    asset_id: Optional[str] = None
    pipeline: Optional[PipelineGraph] = None
    components: Tuple[str, ...] = ()
    equivalents: Tuple[str, ...] = ()
    price: Money
    score: float


class MatchResult(BaseModel):
    model_config = ConfigDict(frozen=True)

    entries: Tuple[MatchEntry, ...] = ()

    def keys(self) -> List[str]:
        return [e.key for e in self.entries]

    def __len__(self) -> int:
        return len(self.entries)


def satisfies(descriptor: AssetDescriptor, request: Request) -> bool:
    """Goal, output and quality predicate shared by single and composed candidates."""
    if descriptor.signature.goal.strip().lower() != request.goal.strip().lower():
        return False
    if request.required_output is not None and not same_type(
        descriptor.signature.output_type, request.required_output
    ):
        return False
    for bound in request.quality_bounds:
        metric = descriptor.metric(bound.metric)
        if metric is None or not bound.holds(metric.value):
            return False
    return True


def _within_budget(price: Money, request: Request) -> bool:
    return request.budget is None or price <= request.budget


def _keywords(request: Request) -> Set[str]:
    wanted: Set[str] = set()
    for keyword in request.keywords:
        wanted |= tokenize(keyword)
    return wanted


def score(
    descriptor: AssetDescriptor, price: Money, request: Request, weights: MatchWeights
) -> float:
    slacks = [
        bound.slack(descriptor.metric(bound.metric).value)  # type: ignore[union-attr]
        for bound in request.quality_bounds
    ]
    quality = sum(slacks) / len(slacks) if slacks else 0.0
    affordability = 1.0 / (1.0 + price.micro_units / MICRO)
    return weights.quality * quality + weights.price * affordability


def match_request(
    index: MarketIndex, request: Request, weights: Optional[MatchWeights] = None
) -> MatchResult:
    weights = weights or MatchWeights()
    wanted = _keywords(request)
    with index.lock:
        corpus = index.snapshot()
        tokens = {d.id: index.tokens_of(d.id) for d in corpus}
        classes = {d.id: sorted(index.by_signature[index.signature_of(d.id)]) for d in corpus}

    entries: List[MatchEntry] = []
    for d in corpus:
        price = nominal_price(d.pricing)
        if satisfies(d, request) and _within_budget(price, request) and wanted <= tokens[d.id]:
            entries.append(
                MatchEntry(
                    key=d.id,
                    asset_id=d.id,
                    components=(d.id,),
                    equivalents=tuple(classes[d.id]),
                    price=price,
                    score=score(d, price, request, weights),
                )
            )

    sources = [d for d in corpus if d.kind == AssetKind.DATA_SOURCE]
    algorithms = [
        d
        for d in corpus
        if d.kind == AssetKind.ALGORITHM
        and len(d.signature.input_types) == 1
        and satisfies(d, request)
    ]
    for algorithm in algorithms:
        for source in sources:
            if not same_type(source.signature.output_type, algorithm.signature.input_types[0]):
                continue
            price = nominal_price(source.pricing) + nominal_price(algorithm.pricing)
            if not _within_budget(price, request):
                continue
            if not wanted <= (tokens[source.id] | tokens[algorithm.id]):
                continue
            try:
                graph = compose_pipeline([source, algorithm], [(0, 0, 1, 0)])
            except CompositionError:
                continue
            entries.append(
                MatchEntry(
                    key=f"{source.id}+{algorithm.id}",
                    pipeline=graph,
                    components=(source.id, algorithm.id),
                    equivalents=tuple(classes[algorithm.id]),
                    price=price,
                    score=score(algorithm, price, request, weights),
                )
            )

    entries.sort(key=lambda e: (-e.score, e.key))
    logger.info("request_matched", goal=request.goal, candidates=len(entries))
    return MatchResult(entries=tuple(entries))


def rank_summary(result: MatchResult, limit: Optional[int] = None) -> Sequence[str]:
    rows = result.entries if limit is None else result.entries[:limit]
    return [f"{e.score:.4f} {e.key} {e.price} equivalents={','.join(e.equivalents)}" for e in rows]
