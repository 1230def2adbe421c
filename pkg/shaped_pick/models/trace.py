from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from shaped_pick.schemas.env import Task


@dataclass(frozen=True, slots=True, eq=False)
class EpisodeTrace:
    """Full rollout record.

    Position arrays have ``horizon + 1`` rows (initial state first); per-step
    arrays have ``horizon`` rows. ``features`` holds the observation feature
    vector of every visited state and is ``None`` for traces read back from CSV.
    """

    goal: NDArray[np.float64]
    gripper_positions: NDArray[np.float64]
    object_positions: NDArray[np.float64]
    actions: NDArray[np.float64]
    rewards: NDArray[np.float64]
    success_flags: NDArray[np.bool_]
    task: Task = "pick_and_place"
    features: NDArray[np.float64] | None = None

    def __post_init__(self) -> None:
        steps = len(self.actions)
        if self.goal.shape != (3,):
            raise ValueError("goal must be a 3-vector")
        if self.gripper_positions.shape != (steps + 1, 3):
            raise ValueError("gripper_positions must have one row more than actions")
        if self.object_positions.shape != self.gripper_positions.shape:
            raise ValueError("object_positions must match gripper_positions")
        if self.actions.ndim != 2 or self.actions.shape[1] != 4:
            raise ValueError("actions must be an (T, 4) array")
        if self.rewards.shape != (steps,) or self.success_flags.shape != (steps,):
            raise ValueError("rewards and success_flags need one entry per action")
        if self.features is not None and self.features.shape[0] != steps + 1:
            raise ValueError("features need one row per visited state")

    @property
    def steps(self) -> int:
        return len(self.actions)

    @property
    def achieved_goals(self) -> NDArray[np.float64]:
        """Achieved goal of every visited state: the object, or the gripper when reaching."""

        if self.task == "reach":
            return self.gripper_positions
        return self.object_positions

    def positions(self, subject: str) -> NDArray[np.float64]:
        if subject == "gripper":
            return self.gripper_positions
        if subject == "object":
            return self.object_positions
        raise ValueError(f"unknown subject '{subject}'")


__all__ = ["EpisodeTrace"]
