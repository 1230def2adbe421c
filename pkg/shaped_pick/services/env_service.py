"""Deterministic kinematic pick-and-place world.

A point gripper moves by bounded displacements inside the unit cube, can grasp
a box resting on the table plane ``z = 0`` and must bring it to a goal. The
``reach`` task keeps the object on the table and asks the gripper itself to
reach the goal. All functions are pure: state goes in, new state comes out.
"""

from __future__ import annotations

import logging

import numpy as np

from shaped_pick.core.errors import EnvConfigurationError, HorizonExceededError
from shaped_pick.models.env import (
    Action,
    EnvState,
    Observation,
    StepResult,
    Vec3,
)
from shaped_pick.schemas.env import EnvConfig, Task
from shaped_pick.services.reward_service import is_success

LOGGER = logging.getLogger(__name__)

MAX_RESET_ATTEMPTS = 1000
MIN_OBJECT_GRIPPER_SEPARATION = 0.1

_XY_RANGE = (0.2, 0.8)
_AIR_GOAL_Z_RANGE = (0.05, 0.45)

__all__ = [
    "achieved_goal",
    "observe",
    "reset",
    "sample_goal",
    "step",
]


def sample_goal(cfg: EnvConfig, rng: np.random.Generator) -> Vec3:
    """Goal above the table with probability ``air_goal_probability``, else on it."""

    x, y = rng.uniform(*_XY_RANGE, size=2)
    if rng.random() < cfg.air_goal_probability:
        low, high = _AIR_GOAL_Z_RANGE
        # uniform on (low, high]: mirror numpy's [low, high)
        z = high - rng.random() * (high - low)
    else:
        z = cfg.object_half_height
    return np.array([x, y, z], dtype=np.float64)


def achieved_goal(state: EnvState, task: Task = "pick_and_place") -> Vec3:
    if task == "reach":
        return state.gripper_pos
    return state.object_pos


def reset(
    cfg: EnvConfig,
    rng: np.random.Generator,
    task: Task = "pick_and_place",
    *,
    training: bool = False,
) -> tuple[EnvState, Vec3]:
    """Sample a fresh episode start and its goal.

    With ``training`` set, a pick-and-place episode starts with the object
    already grasped with probability ``cfg.object_in_hand_probability``.

    Raises ``EnvConfigurationError`` when the separation constraints cannot be
    met within ``MAX_RESET_ATTEMPTS`` draws, which means the config is unusable.
    """

    for _ in range(MAX_RESET_ATTEMPTS):
        gripper = np.array(
            [*rng.uniform(*_XY_RANGE, size=2), rng.uniform(*cfg.gripper_start_height)],
            dtype=np.float64,
        )
        object_pos = np.array(
            [*rng.uniform(*_XY_RANGE, size=2), cfg.object_half_height],
            dtype=np.float64,
        )
        if np.linalg.norm(object_pos[:2] - gripper[:2]) < MIN_OBJECT_GRIPPER_SEPARATION:
            continue

        in_hand = (
            training
            and task == "pick_and_place"
            and cfg.object_in_hand_probability > 0
            and rng.random() < cfg.object_in_hand_probability
        )
        if in_hand:
            object_pos = gripper.copy()

        goal = sample_goal(cfg, rng)
        anchor = gripper if task == "reach" or in_hand else object_pos
        if np.linalg.norm(goal - anchor) < cfg.success_threshold:
            continue

        state = EnvState(
            gripper_pos=gripper,
            grip_closed=in_hand,
            object_pos=object_pos,
            attached=in_hand,
            prev_gripper_delta=np.zeros(3),
            step_index=0,
        )
        return state, goal

    LOGGER.error("reset_rejection_budget_exhausted", extra={"attempts": MAX_RESET_ATTEMPTS})
    raise EnvConfigurationError(
        f"reset could not place gripper, object and goal after {MAX_RESET_ATTEMPTS} attempts"
    )


def step(
    state: EnvState,
    action: Action,
    cfg: EnvConfig,
    goal: Vec3,
    task: Task = "pick_and_place",
) -> StepResult:
    if state.step_index >= cfg.horizon:
        raise HorizonExceededError(
            f"step {state.step_index} is past the horizon of {cfg.horizon}"
        )

    command = action.clamped()
    displacement = cfg.action_scale * np.array([command.dx, command.dy, command.dz])
    gripper = np.clip(state.gripper_pos + displacement, 0.0, 1.0)
    grip_closed = command.grip <= 0

    object_pos = state.object_pos
    attached = state.attached
    if task == "pick_and_place":
        if grip_closed:
            if not attached and np.linalg.norm(gripper - object_pos) <= cfg.grasp_radius:
                attached = True
        elif attached:
            attached = False
            # released objects settle on the table at once
            object_pos = np.array(
                [gripper[0], gripper[1], cfg.object_half_height], dtype=np.float64
            )
        if attached:
            object_pos = gripper

    new_state = EnvState(
        gripper_pos=gripper,
        grip_closed=grip_closed,
        object_pos=object_pos,
        attached=attached,
        prev_gripper_delta=gripper - state.gripper_pos,
        step_index=state.step_index + 1,
    )
    achieved = achieved_goal(new_state, task)
    return StepResult(
        state=new_state,
        achieved_goal=achieved,
        success=is_success(achieved, goal, cfg.success_threshold),
    )


def observe(state: EnvState, goal: Vec3, task: Task = "pick_and_place") -> Observation:
    """Feature layout: gripper(3) grip(1) object(3) object-gripper(3) delta(3) attached(1)."""

    features = np.concatenate(
        [
            state.gripper_pos,
            [1.0 if state.grip_closed else 0.0],
            state.object_pos,
            state.object_pos - state.gripper_pos,
            state.prev_gripper_delta,
            [1.0 if state.attached else 0.0],
        ]
    )
    return Observation(
        features=features,
        achieved_goal=achieved_goal(state, task),
        desired_goal=np.asarray(goal, dtype=np.float64),
    )
