"""Reward specification schema: one of four shaped reward models."""

from __future__ import annotations

from typing import Literal

from pydantic import BaseModel, ConfigDict, Field, model_validator

RewardKind = Literal["vanilla", "prioritized_z", "prioritized_xyz", "manhattan"]

Triple = tuple[float, float, float]

# kind -> {field: default}; a field is only legal for the kind that owns it.
_KIND_FIELDS: dict[str, dict[str, float | Triple]] = {
    "vanilla": {},
    "prioritized_z": {"w_z": 10.0},
    "prioritized_xyz": {"weights": (10.0, 5.0, 1.0)},
    "manhattan": {"penalties": (5.0, 2.5, 1.0), "alignment_tolerance": 0.01},
}
_ALL_KIND_FIELDS = {name for fields in _KIND_FIELDS.values() for name in fields}


class RewardSpec(BaseModel):
    """Base sparse terms plus the kind-specific shaping parameters."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    kind: RewardKind
    living_cost: float = -1.0
    success_reward: float = 1.0
    success_threshold: float = Field(0.05, gt=0)
    shaping_scale: float = Field(1.0, ge=0)
    w_z: float | None = Field(None, ge=0)
    weights: Triple | None = None
    penalties: Triple | None = None
    alignment_tolerance: float | None = Field(None, gt=0)

    @model_validator(mode="before")
    @classmethod
    def _materialize_kind_fields(cls, data: object) -> object:
        if not isinstance(data, dict):
            return data
        kind = data.get("kind")
        owned = _KIND_FIELDS.get(kind) if isinstance(kind, str) else None
        if owned is None:
            return data
        for name in _ALL_KIND_FIELDS - owned.keys():
            if data.get(name) is not None:
                raise ValueError(f"{name} is not a parameter of reward kind '{kind}'")
        merged = dict(data)
        for name, default in owned.items():
            if merged.get(name) is None:
                merged[name] = default
        return merged

    @model_validator(mode="after")
    def _check_non_negative(self) -> RewardSpec:
        for name in ("weights", "penalties"):
            values = getattr(self, name)
            if values is not None and any(value < 0 for value in values):
                raise ValueError(f"{name} must be non-negative")
        if self.success_reward < self.living_cost:
            raise ValueError("success_reward must not be below living_cost")
        return self


__all__ = ["RewardKind", "RewardSpec", "Triple"]
