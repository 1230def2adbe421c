"""Run configuration and per-epoch metrics schemas."""

from __future__ import annotations

from pydantic import BaseModel, ConfigDict, Field, model_validator

from shaped_pick.schemas.agent import DdpgHyper
from shaped_pick.schemas.env import EnvConfig, Task
from shaped_pick.schemas.replay import RelabelStrategy
from shaped_pick.schemas.rewards import RewardSpec

METRICS_COLUMNS = (
    "epoch",
    "train_success",
    "eval_success",
    "critic_loss",
    "actor_loss",
    "wall_seconds",
)


class TrainConfig(BaseModel):
    """Everything that determines a training run; persisted as config.json."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    epochs: int = Field(150, ge=1)
    cycles_per_epoch: int = Field(10, ge=1)
    episodes_per_cycle: int = Field(16, ge=1)
    optimizer_steps_per_cycle: int = Field(40, ge=1)
    eval_episodes: int = Field(20, ge=1)
    seed: int = Field(0, ge=0)
    task: Task = "pick_and_place"
    env: EnvConfig = Field(default_factory=EnvConfig)
    reward: RewardSpec
    hyper: DdpgHyper = Field(default_factory=DdpgHyper)
    strategy: RelabelStrategy = Field(default_factory=RelabelStrategy)
    replay_capacity: int = Field(100_000, ge=1)
    checkpoint_every: int = Field(10, ge=1)
    eval_workers: int = Field(1, ge=1)
    record_wall_time: bool = False

    @model_validator(mode="before")
    @classmethod
    def _resolve_clip_return(cls, data: object) -> object:
        if not isinstance(data, dict):
            return data
        reward = data.get("reward")
        if isinstance(reward, dict):
            kind = reward.get("kind")
        else:
            kind = getattr(reward, "kind", None)
        if kind is None:
            return data

        hyper = data.get("hyper") or {}
        if isinstance(hyper, DdpgHyper):
            if hyper.clip_return is None:
                hyper = hyper.model_copy(update={"clip_return": kind == "vanilla"})
        elif isinstance(hyper, dict) and hyper.get("clip_return") is None:
            hyper = {**hyper, "clip_return": kind == "vanilla"}
        return {**data, "hyper": hyper}


class EpochMetrics(BaseModel):
    model_config = ConfigDict(frozen=True)

    epoch: int = Field(ge=0)
    train_success: float = Field(ge=0, le=1)
    eval_success: float = Field(ge=0, le=1)
    critic_loss: float
    actor_loss: float
    wall_seconds: float = Field(ge=0)


class RunMetrics(BaseModel):
    """Append-only list of epoch rows."""

    rows: list[EpochMetrics] = Field(default_factory=list)

    def append(self, row: EpochMetrics) -> None:
        expected = len(self.rows)
        if row.epoch != expected:
            raise ValueError(f"expected epoch {expected}, got {row.epoch}")
        self.rows.append(row)

    def eval_series(self) -> list[float]:
        return [row.eval_success for row in self.rows]


__all__ = ["EpochMetrics", "METRICS_COLUMNS", "RunMetrics", "TrainConfig"]
