from __future__ import annotations

from typing import Literal

from pydantic import BaseModel, ConfigDict, Field, model_validator

Subject = Literal["gripper", "object"]
AxisSteps = tuple[int | None, int | None, int | None]


class TrajectoryReport(BaseModel):
    """Shape diagnostics for one recorded episode."""

    model_config = ConfigDict(frozen=True)

    subject: Subject
    tolerance: float
    attainment_steps: AxisSteps
    first_touch_steps: AxisSteps
    attainment_order: tuple[str, ...]
    sequentiality_index: float | None = Field(None, ge=1 / 3 - 1e-12, le=1 + 1e-12)
    l1_path_length: float = Field(ge=0)
    l2_path_length: float = Field(ge=0)
    final_object_goal_distance: float = Field(ge=0)
    success: bool

    @model_validator(mode="after")
    def _check_norms(self) -> TrajectoryReport:
        if self.l1_path_length + 1e-12 < self.l2_path_length:
            raise ValueError("l1 path length must be at least the l2 path length")
        return self


__all__ = ["AxisSteps", "Subject", "TrajectoryReport"]
