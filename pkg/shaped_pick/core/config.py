from __future__ import annotations

import logging
import os
from pathlib import Path

from dotenv import dotenv_values, load_dotenv

_ORIGINAL_ENV = dict(os.environ)
_PROJECT_DIR = Path(__file__).resolve().parents[2]
LOGGER = logging.getLogger(__name__)

DEFAULT_RUN_ROOT = "runs"


def _load_env_files() -> None:
    """Apply `.env` then `.env.local`; variables already in the process win."""

    base_env = _PROJECT_DIR / ".env"
    if base_env.exists():
        load_dotenv(base_env, override=False)

    local_override = _PROJECT_DIR / ".env.local"
    if local_override.exists():
        for key, value in dotenv_values(local_override).items():
            if value is None or key in _ORIGINAL_ENV:
                continue
            os.environ[key] = value


_load_env_files()


def _get_env(name: str, default: str | None = None) -> str | None:
    value = os.getenv(name, default)
    if isinstance(value, str):
        value = value.strip() or None
    return value


class Settings:
    """Process-level settings read from the environment."""

    def __init__(self) -> None:
        self.LOG_LEVEL: str = (_get_env("SHAPED_PICK_LOG_LEVEL", "INFO") or "INFO").upper()
        if not hasattr(logging, self.LOG_LEVEL):
            LOGGER.warning("invalid_log_level", extra={"value": self.LOG_LEVEL})
            self.LOG_LEVEL = "INFO"

    @property
    def RUN_ROOT(self) -> Path:
        # read on every access; the variable may change between commands
        return Path(_get_env("SHAPED_PICK_RUN_ROOT", DEFAULT_RUN_ROOT) or DEFAULT_RUN_ROOT)


settings = Settings()
