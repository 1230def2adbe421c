from __future__ import annotations

import structlog
from pytest_mock import MockerFixture

from shaped_pick.core.logging_config import log_event, run_context


def test_run_context_binds_and_clears_run_identity() -> None:
    with run_context(seed=3, reward="manhattan", task="reach"):
        assert structlog.contextvars.get_contextvars() == {
            "seed": 3,
            "reward": "manhattan",
            "task": "reach",
        }

    assert structlog.contextvars.get_contextvars() == {}


def test_log_event_dispatches_on_level(mocker: MockerFixture) -> None:
    logger = mocker.Mock()

    log_event(logger, service="trainer", event="run_halted", level="ERROR", epoch=4)

    logger.error.assert_called_once_with("run_halted", service="trainer", epoch=4)


def test_log_event_unknown_level_falls_back_to_info(mocker: MockerFixture) -> None:
    logger = mocker.Mock()

    log_event(logger, service="cli", event="compare_written", level="loud", runs=2)

    logger.info.assert_called_once_with("compare_written", service="cli", runs=2)
