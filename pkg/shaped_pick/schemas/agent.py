from __future__ import annotations

from pydantic import BaseModel, ConfigDict, Field


class DdpgHyper(BaseModel):
    """DDPG hyperparameters at desk scale."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    gamma: float = Field(0.98, gt=0, lt=1)
    # fraction of the target retained per update
    polyak: float = Field(0.95, ge=0, le=1)
    actor_lr: float = Field(1e-3, gt=0)
    critic_lr: float = Field(1e-3, gt=0)
    batch_size: int = Field(128, ge=1)
    random_action_probability: float = Field(0.3, ge=0, le=1)
    gaussian_noise_scale: float = Field(0.2, ge=0)
    # None resolves against the reward kind: on for vanilla, off for shaped kinds
    clip_return: bool | None = None
    action_l2: float = Field(1.0, ge=0)
    hidden_sizes: tuple[int, ...] = (64, 64)
    normalizer_clip: float = Field(5.0, gt=0)


__all__ = ["DdpgHyper"]
