"""Marketplaces, the market aggregator and matchmaking."""

from .index import MarketIndex, aggregate, equivalents, search
from .marketplace import Marketplace, load_marketplace, publish, retract
from .matchmaking import (
    BoundKind,
    MatchEntry,
    MatchResult,
    MatchWeights,
    QualityBound,
    Request,
    match_request,
)

__all__ = [
    "BoundKind",
    "MarketIndex",
    "Marketplace",
    "MatchEntry",
    "MatchResult",
    "MatchWeights",
    "QualityBound",
    "Request",
    "aggregate",
    "equivalents",
    "load_marketplace",
    "match_request",
    "publish",
    "retract",
    "search",
]
