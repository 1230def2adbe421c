"""Goal-conditioned DDPG: actor, critic, target copies and input normalization."""

from __future__ import annotations

import logging
from collections.abc import Sequence
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from numpy.typing import NDArray

from shaped_pick.core.errors import NonFiniteLossError
from shaped_pick.models.env import ACTION_SIZE, FEATURE_SIZE, GOAL_SIZE, Action, Observation
from shaped_pick.models.replay import Transition
from shaped_pick.models.trace import EpisodeTrace
from shaped_pick.schemas.agent import DdpgHyper
from shaped_pick.utils import nn
from shaped_pick.utils.normalizer import Normalizer

LOGGER = logging.getLogger(__name__)

__all__ = [
    "DdpgAgent",
    "TrainStats",
    "act",
    "create_agent",
    "normalizer_update",
    "train_batch",
    "update_targets",
]


@dataclass(slots=True)
class DdpgAgent:
    actor: nn.MlpParams
    critic: nn.MlpParams
    target_actor: nn.MlpParams
    target_critic: nn.MlpParams
    actor_adam: nn.AdamState
    critic_adam: nn.AdamState
    normalizer: Normalizer
    hyper: DdpgHyper
    # (low, high) clamp for critic targets, or None when return clipping is off
    return_bounds: tuple[float, float] | None = None

    @property
    def input_size(self) -> int:
        return self.actor.input_size

    def act(self, observation: Observation, explore: bool, rng: np.random.Generator) -> Action:
        return act(self, observation, explore, rng)


class TrainStats(NamedTuple):
    critic_loss: float
    actor_loss: float


def create_agent(
    hyper: DdpgHyper,
    rng: np.random.Generator,
    *,
    sparse_range: tuple[float, float] | None = None,
    feature_size: int = FEATURE_SIZE,
    goal_size: int = GOAL_SIZE,
) -> DdpgAgent:
    """Build an agent whose targets start as exact copies of the main networks.

    ``sparse_range`` is the per-step (living_cost, success_reward) pair; it is
    only used when ``hyper.clip_return`` is on.
    """

    actor_in = feature_size + goal_size
    critic_in = actor_in + ACTION_SIZE
    hidden = list(hyper.hidden_sizes)
    actor = nn.init([actor_in, *hidden, ACTION_SIZE], "tanh", rng)
    critic = nn.init([critic_in, *hidden, 1], "identity", rng)

    return_bounds = None
    if hyper.clip_return:
        if sparse_range is None:
            raise ValueError("clip_return needs the reward's (living_cost, success_reward)")
        horizon_factor = 1.0 / (1.0 - hyper.gamma)
        low, high = sparse_range
        return_bounds = (low * horizon_factor, high * horizon_factor)

    return DdpgAgent(
        actor=actor,
        critic=critic,
        target_actor=actor.copy(),
        target_critic=critic.copy(),
        actor_adam=nn.adam_init(actor),
        critic_adam=nn.adam_init(critic),
        normalizer=Normalizer.create(feature_size, goal_size, hyper.normalizer_clip),
        hyper=hyper,
        return_bounds=return_bounds,
    )


def _policy(agent: DdpgAgent, features: NDArray, goals: NDArray) -> NDArray:
    actions, _ = nn.forward(agent.actor, agent.normalizer.inputs(features, goals))
    return actions


def act(
    agent: DdpgAgent,
    observation: Observation,
    explore: bool,
    rng: np.random.Generator,
) -> Action:
    action = _policy(agent, observation.features, observation.desired_goal)
    if explore:
        if rng.random() < agent.hyper.random_action_probability:
            action = rng.uniform(-1.0, 1.0, size=ACTION_SIZE)
        else:
            noise = agent.hyper.gaussian_noise_scale * rng.standard_normal(ACTION_SIZE)
            action = np.clip(action + noise, -1.0, 1.0)
    return Action.from_array(action)


def _stack(batch: Sequence[Transition]) -> dict[str, NDArray]:
    return {
        "features": np.stack([item.observation_features for item in batch]),
        "next_features": np.stack([item.next_observation_features for item in batch]),
        "goals": np.stack([item.goal for item in batch]),
        "actions": np.stack([item.action for item in batch]),
        "rewards": np.array([item.reward for item in batch], dtype=np.float64),
    }


def train_batch(agent: DdpgAgent, batch: Sequence[Transition]) -> TrainStats:
    """One critic and one actor Adam step; target networks are left untouched.

    Both gradients are taken against the networks as they were on entry.
    """

    if not batch:
        raise ValueError("train_batch needs at least one transition")
    hyper = agent.hyper
    data = _stack(batch)
    size = len(batch)

    states = agent.normalizer.inputs(data["features"], data["goals"])
    next_states = agent.normalizer.inputs(data["next_features"], data["goals"])

    next_actions, _ = nn.forward(agent.target_actor, next_states)
    next_q, _ = nn.forward(agent.target_critic, np.concatenate([next_states, next_actions], axis=1))
    targets = data["rewards"] + hyper.gamma * next_q[:, 0]
    if agent.return_bounds is not None:
        targets = np.clip(targets, *agent.return_bounds)

    q_values, critic_cache = nn.forward(
        agent.critic, np.concatenate([states, data["actions"]], axis=1)
    )
    errors = q_values[:, 0] - targets
    critic_loss = float(np.mean(errors**2))
    critic_grads, _ = nn.backward(
        agent.critic, critic_cache, (2.0 / size) * errors[:, np.newaxis]
    )

    policy_actions, actor_cache = nn.forward(agent.actor, states)
    policy_q, policy_cache = nn.forward(
        agent.critic, np.concatenate([states, policy_actions], axis=1)
    )
    actor_loss = float(
        -np.mean(policy_q) + hyper.action_l2 * np.mean(policy_actions**2)
    )
    if not (np.isfinite(critic_loss) and np.isfinite(actor_loss)):
        LOGGER.error(
            "non_finite_loss",
            extra={"critic_loss": critic_loss, "actor_loss": actor_loss},
        )
        raise NonFiniteLossError(
            f"non-finite loss (critic={critic_loss}, actor={actor_loss})"
        )

    _, critic_input_grad = nn.backward(
        agent.critic, policy_cache, np.full((size, 1), -1.0 / size)
    )
    action_grad = critic_input_grad[:, -ACTION_SIZE:] + (
        2.0 * hyper.action_l2 / policy_actions.size
    ) * policy_actions
    actor_grads, _ = nn.backward(agent.actor, actor_cache, action_grad)

    agent.critic, agent.critic_adam = nn.adam_step(
        agent.critic, critic_grads, agent.critic_adam, hyper.critic_lr
    )
    agent.actor, agent.actor_adam = nn.adam_step(
        agent.actor, actor_grads, agent.actor_adam, hyper.actor_lr
    )
    return TrainStats(critic_loss=critic_loss, actor_loss=actor_loss)


def _blend(target: nn.MlpParams, main: nn.MlpParams, polyak: float) -> nn.MlpParams:
    return target.with_arrays(
        [
            polyak * target_array + (1.0 - polyak) * main_array
            for target_array, main_array in zip(target.arrays(), main.arrays(), strict=True)
        ]
    )


def update_targets(agent: DdpgAgent) -> None:
    polyak = agent.hyper.polyak
    agent.target_actor = _blend(agent.target_actor, agent.actor, polyak)
    agent.target_critic = _blend(agent.target_critic, agent.critic, polyak)


def normalizer_update(normalizer: Normalizer, episode: EpisodeTrace) -> None:
    """Feed every visited state's features into the feature moments.

    Goal moments see the desired goal once per state plus every achieved goal,
    since hindsight copies train on achieved goals.
    """

    if episode.features is None:
        raise ValueError("episode has no observation features")
    desired = np.broadcast_to(episode.goal, (episode.features.shape[0], GOAL_SIZE))
    normalizer.features.update(episode.features)
    normalizer.goals.update(np.concatenate([desired, episode.achieved_goals]))
