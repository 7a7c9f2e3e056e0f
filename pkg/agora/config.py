"""
Configuration
A JSON file validated into Settings; AGORA_* environment variables fill
fields the file leaves out (nested fields use "__", e.g. AGORA_COST_MODEL__SYMMETRIC).
"""

import json
from pathlib import Path
from typing import Any, Dict, Optional, Tuple, Union

import structlog
from pydantic import BaseModel, ConfigDict, Field, ValidationError
from pydantic_settings import BaseSettings, SettingsConfigDict

from agora.catalog.matchmaking import MatchWeights
from agora.errors import ConfigError
from agora.models.regions import Region
from agora.planner.cost import CostModel

logger = structlog.get_logger(__name__)

PATH_FIELDS = ("node_registry", "authority_registry", "variants", "pricing")


class SettlementSettings(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    attempts: int = Field(3, ge=1, le=20)
    base_backoff_s: float = Field(0.05, ge=0.0)
    max_backoff_s: float = Field(1.0, ge=0.0)


class Settings(BaseSettings):
    model_config = SettingsConfigDict(
        env_prefix="AGORA_", env_nested_delimiter="__", extra="forbid", frozen=True
    )

    # marketplace name -> newline-delimited descriptor file
    marketplaces: Dict[str, Path] = Field(default_factory=dict)
    node_registry: Optional[Path] = None
    authority_registry: Optional[Path] = None
    variants: Optional[Path] = None
    # asset id -> pricing model, merged over catalog pricing when billing
    pricing: Optional[Path] = None

    cost_model: CostModel = Field(default_factory=CostModel)
    match_weights: MatchWeights = Field(default_factory=MatchWeights)
    window_s: int = Field(60, gt=0, le=86_400)
    default_region: Region = Region.EU
    trusted_authorities: Tuple[str, ...] = ()
    settlement: SettlementSettings = Field(default_factory=SettlementSettings)
    ledger_url: str = "sqlite://"


Config = Settings


def _field_name(error: Dict[str, Any]) -> str:
    return ".".join(str(part) for part in error.get("loc", ())) or "$"


def _resolve(value: Union[str, Path], base: Path) -> Path:
    path = Path(value)
    return path if path.is_absolute() else (base / path).resolve()


def load_config(path: Union[str, Path]) -> Settings:
    """Read, resolve and validate a config file.

    Relative paths are taken relative to the config file and must exist.
    Raises ConfigError(field, reason).
    """
    source = Path(path)
    try:
        raw = json.loads(source.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError("$", f"cannot read {source}: {exc.strerror or exc}") from exc
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ConfigError("$", f"not a JSON document: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("$", "config must be a JSON object")

    base = source.resolve().parent
    markets = raw.get("marketplaces")
    if isinstance(markets, dict):
        raw["marketplaces"] = {
            name: str(_resolve(p, base)) if isinstance(p, str) else p
            for name, p in markets.items()
        }
    for name in PATH_FIELDS:
        if isinstance(raw.get(name), str):
            raw[name] = str(_resolve(raw[name], base))

    try:
        settings = Settings(**raw)
    except ValidationError as exc:
        first = exc.errors()[0]
        raise ConfigError(_field_name(first), first.get("msg", "invalid value")) from exc

    for market, market_path in settings.marketplaces.items():
        if not market_path.is_file():
            raise ConfigError(f"marketplaces.{market}", f"file not found: {market_path}")
    for name in PATH_FIELDS:
        value = getattr(settings, name)
        if value is not None and not value.is_file():
            raise ConfigError(name, f"file not found: {value}")

    logger.debug("config_loaded", path=str(source), settings=json.loads(dump_config(settings)))
    return settings


def dump_config(settings: Settings) -> str:
    """Serialize so that load_config reads back an equal Settings."""
    return settings.model_dump_json(indent=2)


def default_config() -> Settings:
    """Defaults only, for commands run without --config."""
    return Settings()
