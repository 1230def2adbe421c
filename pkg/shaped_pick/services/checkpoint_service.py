"""Agent checkpoints as plain JSON documents.

Floats are written with ``repr`` by the json module, so a save/load cycle
restores every parameter bit for bit and identical agents produce identical
bytes.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any

from pydantic import ValidationError

from shaped_pick.core.errors import ShapeMismatchError
from shaped_pick.models.env import ACTION_SIZE
from shaped_pick.schemas.agent import DdpgHyper
from shaped_pick.schemas.env import Task
from shaped_pick.schemas.rewards import RewardSpec
from shaped_pick.schemas.train import TrainConfig
from shaped_pick.services.agent_service import DdpgAgent
from shaped_pick.utils import nn
from shaped_pick.utils.normalizer import Normalizer

CHECKPOINT_FORMAT = "shaped_pick.checkpoint/1"

__all__ = [
    "CHECKPOINT_FORMAT",
    "Checkpoint",
    "check_compatible",
    "checkpoint_path",
    "load_checkpoint",
    "save_checkpoint",
]


@dataclass(slots=True)
class Checkpoint:
    agent: DdpgAgent
    epoch: int
    task: Task
    reward: RewardSpec


def checkpoint_path(run_dir: Path | str, epoch: int) -> Path:
    return Path(run_dir) / "checkpoints" / f"epoch_{epoch}.json"


def _payload(agent: DdpgAgent, epoch: int, task: Task, reward: RewardSpec) -> dict[str, Any]:
    return {
        "format": CHECKPOINT_FORMAT,
        "epoch": epoch,
        "task": task,
        "reward": reward.model_dump(mode="json", exclude_none=True),
        "hyper": agent.hyper.model_dump(mode="json"),
        "feature_size": agent.normalizer.features.size,
        "goal_size": agent.normalizer.goals.size,
        "return_bounds": list(agent.return_bounds) if agent.return_bounds else None,
        "actor": nn.params_to_dict(agent.actor),
        "critic": nn.params_to_dict(agent.critic),
        "target_actor": nn.params_to_dict(agent.target_actor),
        "target_critic": nn.params_to_dict(agent.target_critic),
        "actor_adam": nn.adam_to_dict(agent.actor_adam),
        "critic_adam": nn.adam_to_dict(agent.critic_adam),
        "normalizer": agent.normalizer.to_dict(),
    }


def save_checkpoint(
    agent: DdpgAgent,
    path: Path | str,
    *,
    epoch: int,
    task: Task,
    reward: RewardSpec,
) -> Path:
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    document = json.dumps(_payload(agent, epoch, task, reward), sort_keys=True)
    target.write_text(document + "\n", encoding="utf-8")
    return target


def load_checkpoint(path: Path | str) -> Checkpoint:
    source = Path(path)
    try:
        payload = json.loads(source.read_text(encoding="utf-8"))
    except OSError as exc:
        raise OSError(f"could not read checkpoint {source}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ShapeMismatchError(f"{source} is not a JSON checkpoint: {exc}") from exc

    if not isinstance(payload, dict) or payload.get("format") != CHECKPOINT_FORMAT:
        raise ShapeMismatchError(f"{source} is not a {CHECKPOINT_FORMAT} document")

    try:
        hyper = DdpgHyper.model_validate(payload["hyper"])
        reward = RewardSpec.model_validate(payload["reward"])
        actor = nn.params_from_dict(payload["actor"])
        critic = nn.params_from_dict(payload["critic"])
        bounds = payload.get("return_bounds")
        agent = DdpgAgent(
            actor=actor,
            critic=critic,
            target_actor=nn.params_from_dict(payload["target_actor"]),
            target_critic=nn.params_from_dict(payload["target_critic"]),
            actor_adam=nn.adam_from_dict(payload["actor_adam"], actor),
            critic_adam=nn.adam_from_dict(payload["critic_adam"], critic),
            normalizer=Normalizer.from_dict(payload["normalizer"]),
            hyper=hyper,
            return_bounds=(float(bounds[0]), float(bounds[1])) if bounds else None,
        )
        epoch = int(payload["epoch"])
        task = payload["task"]
        input_size = int(payload["feature_size"]) + int(payload["goal_size"])
    except (KeyError, TypeError, ValueError, ValidationError) as exc:
        raise ShapeMismatchError(f"malformed checkpoint {source}: {exc}") from exc

    if actor.input_size != input_size or critic.input_size != input_size + ACTION_SIZE:
        raise ShapeMismatchError(f"{source}: network inputs disagree with the normalizer")
    return Checkpoint(agent=agent, epoch=epoch, task=task, reward=reward)


def check_compatible(checkpoint: Checkpoint, config: TrainConfig) -> None:
    """Reject a checkpoint trained on another task or observation layout."""

    if checkpoint.task != config.task:
        raise ShapeMismatchError(
            f"checkpoint was trained on task '{checkpoint.task}', config asks for '{config.task}'"
        )
    hidden = tuple(checkpoint.agent.actor.layer_sizes[1:-1])
    if hidden != tuple(config.hyper.hidden_sizes):
        raise ShapeMismatchError(
            f"checkpoint hidden sizes {hidden} differ from config {config.hyper.hidden_sizes}"
        )
