"""Strict loading and persisting of run configuration files."""

from __future__ import annotations

import json
import logging
from pathlib import Path
from typing import Any

from pydantic import ValidationError

from shaped_pick.core.errors import ConfigError
from shaped_pick.schemas.train import TrainConfig

LOGGER = logging.getLogger(__name__)

CONFIG_FILENAME = "config.json"

__all__ = ["CONFIG_FILENAME", "dump_config", "load_train_config", "parse_train_config"]


def _dotted(location: tuple[int | str, ...]) -> str:
    return ".".join(str(part) for part in location) or "<root>"


def parse_train_config(
    document: dict[str, Any],
    *,
    seed_override: int | None = None,
) -> TrainConfig:
    """Validate a config mapping; the first offending key is named in the error."""

    if not isinstance(document, dict):
        raise ConfigError("run config must be a JSON object")
    merged = dict(document)
    if seed_override is not None:
        merged["seed"] = seed_override
    try:
        return TrainConfig.model_validate(merged)
    except ValidationError as exc:
        first = exc.errors()[0]
        key = _dotted(tuple(first["loc"]))
        LOGGER.warning("config_invalid", extra={"key": key, "reason": first["msg"]})
        raise ConfigError(f"invalid config at '{key}': {first['msg']}", key=key) from exc


def load_train_config(path: Path | str, *, seed_override: int | None = None) -> TrainConfig:
    source = Path(path)
    try:
        document = json.loads(source.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"could not read config {source}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{source} is not valid JSON: {exc}") from exc
    return parse_train_config(document, seed_override=seed_override)


def dump_config(config: TrainConfig, path: Path | str) -> Path:
    """Persist with every default materialized so the file is self-describing."""

    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    document = config.model_dump(mode="json", exclude_none=True)
    target.write_text(json.dumps(document, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return target
