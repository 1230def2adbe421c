from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray


@dataclass(frozen=True, slots=True, eq=False)
class Transition:
    """One stored step, original or hindsight-relabeled.

    ``reward`` is always ``reward_service.compute`` evaluated at
    ``(next_gripper_pos, achieved_goal_next, goal)``.
    """

    observation_features: NDArray[np.float64]
    action: NDArray[np.float64]
    reward: float
    next_observation_features: NDArray[np.float64]
    goal: NDArray[np.float64]
    achieved_goal_next: NDArray[np.float64]
    gripper_pos: NDArray[np.float64]
    next_gripper_pos: NDArray[np.float64]
    success: bool
    relabeled: bool = False


__all__ = ["Transition"]
