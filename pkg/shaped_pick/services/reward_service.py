"""The four shaped reward models.

Every reward is a pure function of the gripper position, the achieved goal and
the desired goal, so hindsight relabeling can recompute it for any goal.
Shaping always measures the gripper against the desired goal; success always
measures the achieved goal.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray

from shaped_pick.schemas.rewards import RewardSpec

__all__ = [
    "RewardInput",
    "compute",
    "compute_many",
    "is_success",
    "reward_bounds",
    "shaping_penalty",
]


@dataclass(frozen=True, slots=True)
class RewardInput:
    gripper_pos: NDArray[np.float64]
    achieved_goal: NDArray[np.float64]
    desired_goal: NDArray[np.float64]


def is_success(achieved: ArrayLike, desired: ArrayLike, threshold: float) -> bool:
    if threshold <= 0:
        raise ValueError("success threshold must be positive")
    delta = np.asarray(achieved, dtype=np.float64) - np.asarray(desired, dtype=np.float64)
    # hypot keeps exact-boundary cases such as a 3-4-5 offset on the inclusive side
    return math.hypot(*delta) <= threshold


def shaping_penalty(spec: RewardSpec, delta: NDArray[np.float64]) -> NDArray[np.float64]:
    """Non-negative shaping term for gripper-minus-goal offsets of shape (..., 3)."""

    offset = np.abs(np.asarray(delta, dtype=np.float64))
    if spec.kind == "vanilla":
        penalty = np.zeros(offset.shape[:-1])
    elif spec.kind == "prioritized_z":
        penalty = spec.w_z * offset[..., 2]
    elif spec.kind == "prioritized_xyz":
        w_x, w_y, w_z = spec.weights
        penalty = w_x * offset[..., 0] + w_y * offset[..., 1] + w_z * offset[..., 2]
    elif spec.kind == "manhattan":
        p_x, p_y, p_z = spec.penalties
        misaligned = offset > spec.alignment_tolerance
        penalty = (
            p_x * misaligned[..., 0] + p_y * misaligned[..., 1] + p_z * misaligned[..., 2]
        )
    else:  # pragma: no cover - guarded by the schema
        raise ValueError(f"unknown reward kind '{spec.kind}'")
    return spec.shaping_scale * penalty


def compute(spec: RewardSpec, reward_input: RewardInput) -> float:
    success = is_success(
        reward_input.achieved_goal, reward_input.desired_goal, spec.success_threshold
    )
    base = spec.success_reward if success else spec.living_cost
    delta = np.asarray(reward_input.gripper_pos, dtype=np.float64) - np.asarray(
        reward_input.desired_goal, dtype=np.float64
    )
    return float(base - shaping_penalty(spec, delta))


def compute_many(
    spec: RewardSpec,
    gripper: ArrayLike,
    achieved: ArrayLike,
    desired: ArrayLike,
) -> tuple[NDArray[np.float64], NDArray[np.bool_]]:
    """Vectorized ``compute`` over (N, 3) arrays; also returns the success mask."""

    gripper_arr = np.asarray(gripper, dtype=np.float64)
    achieved_arr = np.asarray(achieved, dtype=np.float64)
    desired_arr = np.asarray(desired, dtype=np.float64)
    success = np.linalg.norm(achieved_arr - desired_arr, axis=-1) <= spec.success_threshold
    base = np.where(success, spec.success_reward, spec.living_cost)
    rewards = base - shaping_penalty(spec, gripper_arr - desired_arr)
    return rewards, success


def reward_bounds(spec: RewardSpec) -> tuple[float, float]:
    """Per-step range of the sparse part: (living_cost, success_reward)."""

    return spec.living_cost, spec.success_reward
