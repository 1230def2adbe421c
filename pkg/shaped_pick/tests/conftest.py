from __future__ import annotations

from collections.abc import Callable, Sequence
from typing import Any

import numpy as np
import pytest

from shaped_pick.core.seeding import derive_rng
from shaped_pick.models.env import Action, Observation
from shaped_pick.models.trace import EpisodeTrace
from shaped_pick.schemas.env import EnvConfig
from shaped_pick.schemas.rewards import RewardSpec
from shaped_pick.schemas.train import TrainConfig
from shaped_pick.utils.run_config import parse_train_config

REWARD_KINDS = ("vanilla", "prioritized_z", "prioritized_xyz", "manhattan")


class GoalSeekingPolicy:
    """Scripted reach policy: heads straight for the desired goal."""

    def act(self, observation: Observation, explore: bool, rng: np.random.Generator) -> Action:
        delta = (observation.desired_goal - observation.features[:3]) / 0.05
        return Action(*np.clip(delta, -1.0, 1.0), 1.0)


class IdlePolicy:
    """Never moves and keeps the grip open."""

    def act(self, observation: Observation, explore: bool, rng: np.random.Generator) -> Action:
        return Action(0.0, 0.0, 0.0, 1.0)


@pytest.fixture
def rng() -> np.random.Generator:
    return derive_rng(1234)


@pytest.fixture
def env_config() -> EnvConfig:
    return EnvConfig()


@pytest.fixture(params=REWARD_KINDS)
def reward_spec(request: pytest.FixtureRequest) -> RewardSpec:
    return RewardSpec(kind=request.param)


@pytest.fixture
def tiny_config() -> Callable[..., TrainConfig]:
    """Factory for fast configs: short horizon, small networks, one cycle."""

    def _build(**overrides: Any) -> TrainConfig:
        document: dict[str, Any] = {
            "epochs": 1,
            "cycles_per_epoch": 1,
            "episodes_per_cycle": 1,
            "optimizer_steps_per_cycle": 2,
            "eval_episodes": 2,
            "seed": 7,
            "task": "reach",
            "env": {"horizon": 10},
            "reward": {"kind": "vanilla"},
            "hyper": {"batch_size": 8, "hidden_sizes": [8]},
            "checkpoint_every": 1,
        }
        for key, value in overrides.items():
            if isinstance(value, dict) and isinstance(document.get(key), dict):
                document[key] = {**document[key], **value}
            else:
                document[key] = value
        return parse_train_config(document)

    return _build


def make_trace(
    positions: Sequence[Sequence[float]],
    goal: Sequence[float],
    *,
    object_positions: Sequence[Sequence[float]] | None = None,
    task: str = "pick_and_place",
) -> EpisodeTrace:
    """Trace whose gripper visits ``positions``; actions and rewards are placeholders."""

    grippers = np.asarray(positions, dtype=np.float64)
    steps = len(grippers) - 1
    objects = (
        np.asarray(object_positions, dtype=np.float64)
        if object_positions is not None
        else grippers.copy()
    )
    return EpisodeTrace(
        goal=np.asarray(goal, dtype=np.float64),
        gripper_positions=grippers,
        object_positions=objects,
        actions=np.zeros((steps, 4)),
        rewards=np.full(steps, -1.0),
        success_flags=np.zeros(steps, dtype=bool),
        task=task,  # type: ignore[arg-type]
    )
