"""
Market index
Signature classes, keyword inverted index and provenance over one or more
marketplaces. A single RLock serializes writers; readers take it briefly to
copy what they need, so nobody observes a half-indexed asset.
"""

import re
import threading
from collections import defaultdict
from typing import TYPE_CHECKING, Dict, FrozenSet, Iterable, List, Optional, Set

import structlog

from agora.assets.signature import logical_signature
from agora.errors import IdCollisionAcrossMarkets, UnknownAsset
from agora.models.assets import AssetDescriptor

if TYPE_CHECKING:
    from .marketplace import Marketplace

logger = structlog.get_logger(__name__)

TOKEN_PATTERN = re.compile(r"[a-z0-9]+")


def tokenize(text: str) -> Set[str]:
    return set(TOKEN_PATTERN.findall(text.lower()))


def descriptor_tokens(d: AssetDescriptor) -> FrozenSet[str]:
    words: Set[str] = set()
    for text in (d.id, d.name, d.provider, d.signature.goal, d.kind.value):
        words |= tokenize(text)
    return frozenset(words)


class MarketIndex:
    """Index over the union of marketplaces"""

    def __init__(self) -> None:
        self.by_signature: Dict[bytes, Set[str]] = defaultdict(set)
        self.by_keyword: Dict[str, Set[str]] = defaultdict(set)
        self.provenance: Dict[str, str] = {}
        self.descriptors: Dict[str, AssetDescriptor] = {}
        self._signatures: Dict[str, bytes] = {}
        self._tokens: Dict[str, FrozenSet[str]] = {}
        self.lock = threading.RLock()

    def __len__(self) -> int:
        return len(self.descriptors)

    def __contains__(self, asset_id: object) -> bool:
        return asset_id in self.descriptors

    def add(self, descriptor: AssetDescriptor, market: str) -> None:
        with self.lock:
            existing = self.provenance.get(descriptor.id)
            if existing is not None:
                raise IdCollisionAcrossMarkets(descriptor.id, existing, market)
            signature = logical_signature(descriptor)
            tokens = descriptor_tokens(descriptor)
            self.descriptors[descriptor.id] = descriptor
            self.provenance[descriptor.id] = market
            self._signatures[descriptor.id] = signature
            self._tokens[descriptor.id] = tokens
            self.by_signature[signature].add(descriptor.id)
            for token in tokens:
                self.by_keyword[token].add(descriptor.id)

    def remove(self, asset_id: str) -> AssetDescriptor:
        with self.lock:
            if asset_id not in self.descriptors:
                raise UnknownAsset(asset_id)
            descriptor = self.descriptors.pop(asset_id)
            del self.provenance[asset_id]
            signature = self._signatures.pop(asset_id)
            self.by_signature[signature].discard(asset_id)
            if not self.by_signature[signature]:
                del self.by_signature[signature]
            for token in self._tokens.pop(asset_id):
                self.by_keyword[token].discard(asset_id)
                if not self.by_keyword[token]:
                    del self.by_keyword[token]
            return descriptor

    def resolve(self, asset_id: str) -> Optional[AssetDescriptor]:
        with self.lock:
            return self.descriptors.get(asset_id)

    def signature_of(self, asset_id: str) -> bytes:
        with self.lock:
            if asset_id not in self._signatures:
                raise UnknownAsset(asset_id)
            return self._signatures[asset_id]

    def tokens_of(self, asset_id: str) -> FrozenSet[str]:
        with self.lock:
            return self._tokens.get(asset_id, frozenset())

    def snapshot(self) -> List[AssetDescriptor]:
        """Consistent copy of all descriptors, sorted by id."""
        with self.lock:
            return [self.descriptors[k] for k in sorted(self.descriptors)]


def aggregate(markets: Iterable["Marketplace"]) -> MarketIndex:
    """Build one index over several marketplaces; provenance records each origin."""
    index = MarketIndex()
    for market in markets:
        for descriptor in market.snapshot():
            index.add(descriptor, market.name)
    logger.info("markets_aggregated", assets=len(index), classes=len(index.by_signature))
    return index


def equivalents(index: MarketIndex, asset_id: str) -> Set[str]:
    with index.lock:
        signature = index.signature_of(asset_id)
        return set(index.by_signature[signature])


def search(index: MarketIndex, keywords: Iterable[str]) -> List[str]:
    """Ids holding every keyword token; no keywords matches everything."""
    wanted: Set[str] = set()
    for keyword in keywords:
        wanted |= tokenize(keyword)
    with index.lock:
        if not wanted:
            return sorted(index.descriptors)
        hits: Optional[Set[str]] = None
        for token in wanted:
            ids = index.by_keyword.get(token, set())
            hits = set(ids) if hits is None else hits & ids
        return sorted(hits or ())
