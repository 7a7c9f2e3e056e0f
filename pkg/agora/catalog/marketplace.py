"""
Marketplaces
A named store of descriptors with its own index; publish and retract update
both under one lock.
"""

from pathlib import Path
from typing import Dict, List, Union

import structlog

from agora.assets.codec import iter_descriptors
from agora.assets.validation import validate_descriptor
from agora.errors import DuplicateId, InvalidDescriptor, UnknownAsset
from agora.models.assets import AssetDescriptor

from .index import MarketIndex

logger = structlog.get_logger(__name__)


class Marketplace:
    def __init__(self, name: str):
        self.name = name
        self.index = MarketIndex()

    @property
    def assets(self) -> Dict[str, AssetDescriptor]:
        with self.index.lock:
            return dict(self.index.descriptors)

    def __len__(self) -> int:
        return len(self.index)

    def __contains__(self, asset_id: object) -> bool:
        return asset_id in self.index

    def get(self, asset_id: str) -> AssetDescriptor:
        descriptor = self.index.resolve(asset_id)
        if descriptor is None:
            raise UnknownAsset(asset_id)
        return descriptor

    def snapshot(self) -> List[AssetDescriptor]:
        return self.index.snapshot()

    def publish(self, descriptor: AssetDescriptor) -> str:
        report = validate_descriptor(descriptor, resolve=self.index.resolve)
        if not report.ok:
            raise InvalidDescriptor(descriptor.id, report.violations)
        with self.index.lock:
            if descriptor.id in self.index:
                raise DuplicateId(descriptor.id, self.name)
            self.index.add(descriptor, self.name)
        logger.info("asset_published", asset_id=descriptor.id, market=self.name)
        return descriptor.id

    def retract(self, asset_id: str) -> AssetDescriptor:
        descriptor = self.index.remove(asset_id)
        logger.info("asset_retracted", asset_id=asset_id, market=self.name)
        return descriptor


def publish(market: Marketplace, descriptor: AssetDescriptor) -> str:
    return market.publish(descriptor)


def retract(market: Marketplace, asset_id: str) -> AssetDescriptor:
    return market.retract(asset_id)


def load_marketplace(name: str, path: Union[str, Path]) -> Marketplace:
    """Bulk load newline-delimited descriptor documents into a new marketplace."""
    market = Marketplace(name)
    with open(path, "rb") as handle:
        for descriptor in iter_descriptors(handle):
            market.publish(descriptor)
    logger.info("marketplace_loaded", market=name, assets=len(market))
    return market
