"""Value types of the kinematic world."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.typing import NDArray

Vec3 = NDArray[np.float64]

FEATURE_SIZE = 14
GOAL_SIZE = 3
ACTION_SIZE = 4


def vec3(x: float, y: float, z: float) -> Vec3:
    return np.array([x, y, z], dtype=np.float64)


def _frozen(values: NDArray[np.float64]) -> NDArray[np.float64]:
    array = np.array(values, dtype=np.float64)
    array.setflags(write=False)
    return array


@dataclass(frozen=True, slots=True)
class Action:
    """Gripper displacement command and grip signal, each in [-1, 1]."""

    dx: float
    dy: float
    dz: float
    grip: float

    def clamped(self) -> Action:
        return Action(*(float(np.clip(value, -1.0, 1.0)) for value in self.as_tuple()))

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.dx, self.dy, self.dz, self.grip)

    def as_array(self) -> NDArray[np.float64]:
        return np.array(self.as_tuple(), dtype=np.float64)

    @classmethod
    def from_array(cls, values: NDArray[np.float64]) -> Action:
        if np.shape(values) != (ACTION_SIZE,):
            raise ValueError(f"action needs {ACTION_SIZE} components, got {np.shape(values)}")
        return cls(*(float(value) for value in values))


@dataclass(frozen=True, slots=True, eq=False)
class EnvState:
    """Immutable world state; every transition builds a new instance."""

    gripper_pos: Vec3
    grip_closed: bool
    object_pos: Vec3
    attached: bool
    prev_gripper_delta: Vec3 = field(default_factory=lambda: np.zeros(3))
    step_index: int = 0

    def __post_init__(self) -> None:
        for name in ("gripper_pos", "object_pos", "prev_gripper_delta"):
            value = _frozen(getattr(self, name))
            if value.shape != (3,) or not np.all(np.isfinite(value)):
                raise ValueError(f"{name} must be a finite 3-vector")
            object.__setattr__(self, name, value)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, EnvState):
            return NotImplemented
        return (
            np.array_equal(self.gripper_pos, other.gripper_pos)
            and self.grip_closed == other.grip_closed
            and np.array_equal(self.object_pos, other.object_pos)
            and self.attached == other.attached
            and np.array_equal(self.prev_gripper_delta, other.prev_gripper_delta)
            and self.step_index == other.step_index
        )

    __hash__ = None  # type: ignore[assignment]


@dataclass(frozen=True, slots=True, eq=False)
class Observation:
    features: NDArray[np.float64]
    achieved_goal: Vec3
    desired_goal: Vec3

    def __post_init__(self) -> None:
        for name in ("features", "achieved_goal", "desired_goal"):
            object.__setattr__(self, name, _frozen(getattr(self, name)))
        if self.features.shape != (FEATURE_SIZE,):
            raise ValueError(f"features must have length {FEATURE_SIZE}")


@dataclass(frozen=True, slots=True, eq=False)
class StepResult:
    state: EnvState
    achieved_goal: Vec3
    success: bool


__all__ = [
    "ACTION_SIZE",
    "Action",
    "EnvState",
    "FEATURE_SIZE",
    "GOAL_SIZE",
    "Observation",
    "StepResult",
    "Vec3",
    "vec3",
]
