"""Configuration schema for the kinematic pick-and-place world."""

from __future__ import annotations

from typing import Literal

from pydantic import BaseModel, ConfigDict, Field, model_validator

Task = Literal["pick_and_place", "reach"]


class EnvConfig(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    horizon: int = Field(50, ge=1)
    action_scale: float = Field(0.05, gt=0)
    grasp_radius: float = Field(0.03, gt=0)
    success_threshold: float = Field(0.05, gt=0)
    object_half_height: float = Field(0.02, gt=0)
    air_goal_probability: float = Field(0.5, ge=0, le=1)
    # (low, high) of the gripper's starting height
    gripper_start_height: tuple[float, float] = (0.3, 0.7)
    # exploratory pick-and-place episodes only; evaluation always starts on the table
    object_in_hand_probability: float = Field(0.0, ge=0, le=1)

    @model_validator(mode="after")
    def _check_start_height(self) -> EnvConfig:
        low, high = self.gripper_start_height
        if not 0.0 <= low <= high <= 1.0:
            raise ValueError("gripper_start_height must satisfy 0 <= low <= high <= 1")
        return self


__all__ = ["EnvConfig", "Task"]
