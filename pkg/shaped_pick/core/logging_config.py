"""Structured JSON logging for training runs and CLI commands.

Events go to stderr so that stdout stays free for the tables and summaries the
CLI prints.
"""

from __future__ import annotations

import logging
import sys
from collections.abc import Iterator
from contextlib import contextmanager
from functools import lru_cache
from typing import Any

import structlog

from shaped_pick.core.config import settings

_LEVELS = frozenset({"debug", "info", "warning", "error", "critical"})


@lru_cache(maxsize=1)
def _base_logger() -> structlog.stdlib.BoundLogger:
    logging.basicConfig(
        format="%(message)s",
        stream=sys.stderr,
        level=getattr(logging, settings.LOG_LEVEL, logging.INFO),
    )

    structlog.configure(
        processors=[
            structlog.contextvars.merge_contextvars,
            structlog.stdlib.filter_by_level,
            structlog.processors.add_log_level,
            structlog.processors.TimeStamper(fmt="iso", utc=True),
            structlog.processors.format_exc_info,
            structlog.processors.JSONRenderer(sort_keys=True),
        ],
        context_class=dict,
        logger_factory=structlog.stdlib.LoggerFactory(),
        wrapper_class=structlog.stdlib.BoundLogger,
        cache_logger_on_first_use=True,
    )

    return structlog.get_logger("shaped_pick")


def get_logger(**initial_context: Any) -> structlog.stdlib.BoundLogger:
    logger = _base_logger()
    if initial_context:
        return logger.bind(**initial_context)
    return logger


@contextmanager
def run_context(*, seed: int, reward: str, task: str) -> Iterator[None]:
    """Tag every event logged inside the block with the run it belongs to."""

    with structlog.contextvars.bound_contextvars(seed=seed, reward=reward, task=task):
        yield


def log_event(
    logger: structlog.stdlib.BoundLogger,
    service: str,
    event: str,
    level: str = "info",
    **extra: Any,
) -> None:
    normalized = level.lower()
    if normalized not in _LEVELS:
        normalized = "info"
    getattr(logger, normalized)(event, service=service, **extra)


__all__ = ["get_logger", "log_event", "run_context"]
