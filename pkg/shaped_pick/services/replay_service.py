"""Flat transition ring with hindsight goal relabeling at store time."""

from __future__ import annotations

import numpy as np

from shaped_pick.core import metrics
from shaped_pick.core.errors import EmptyBufferError, EmptyEpisodeError
from shaped_pick.models.replay import Transition
from shaped_pick.models.trace import EpisodeTrace
from shaped_pick.schemas.replay import RelabelStrategy
from shaped_pick.schemas.rewards import RewardSpec
from shaped_pick.services.reward_service import RewardInput, compute, is_success

__all__ = ["ReplayBuffer", "relabel_indices", "sample_batch", "store_episode"]


class ReplayBuffer:
    """Fixed-capacity ring; once full, each write evicts the oldest transition."""

    def __init__(self, capacity: int = 100_000) -> None:
        if capacity < 1:
            raise ValueError("capacity must be positive")
        self.capacity = capacity
        self._storage: list[Transition] = []
        self._next_index = 0

    def __len__(self) -> int:
        return len(self._storage)

    @property
    def size(self) -> int:
        return len(self._storage)

    def add(self, transition: Transition) -> None:
        if len(self._storage) < self.capacity:
            self._storage.append(transition)
        else:
            self._storage[self._next_index] = transition
        self._next_index = (self._next_index + 1) % self.capacity

    def __getitem__(self, index: int) -> Transition:
        return self._storage[index]

    def transitions(self) -> list[Transition]:
        """Stored transitions, oldest first."""

        if len(self._storage) < self.capacity:
            return list(self._storage)
        return self._storage[self._next_index :] + self._storage[: self._next_index]


def relabel_indices(
    step: int,
    steps: int,
    strategy: RelabelStrategy,
    rng: np.random.Generator,
) -> list[int]:
    """Step indices whose achieved goals become substitute goals for ``step``.

    future: up to k distinct indices strictly after ``step`` (fewer near the
    tail); final: the last index, k times; episode: k indices over all steps.
    """

    if strategy.k == 0:
        return []
    if strategy.kind == "future":
        later = np.arange(step + 1, steps)
        if later.size == 0:
            return []
        count = min(strategy.k, later.size)
        return [int(index) for index in rng.choice(later, size=count, replace=False)]
    if strategy.kind == "final":
        return [steps - 1] * strategy.k
    return [int(index) for index in rng.integers(0, steps, size=strategy.k)]


def _transition(
    trace: EpisodeTrace,
    step: int,
    goal: np.ndarray,
    spec: RewardSpec,
    relabeled: bool,
) -> Transition:
    achieved_next = trace.achieved_goals[step + 1]
    next_gripper = trace.gripper_positions[step + 1]
    reward = compute(
        spec,
        RewardInput(gripper_pos=next_gripper, achieved_goal=achieved_next, desired_goal=goal),
    )
    return Transition(
        observation_features=trace.features[step],
        action=trace.actions[step],
        reward=reward,
        next_observation_features=trace.features[step + 1],
        goal=goal,
        achieved_goal_next=achieved_next,
        gripper_pos=trace.gripper_positions[step],
        next_gripper_pos=next_gripper,
        success=is_success(achieved_next, goal, spec.success_threshold),
        relabeled=relabeled,
    )


def store_episode(
    buffer: ReplayBuffer,
    episode: EpisodeTrace,
    strategy: RelabelStrategy,
    spec: RewardSpec,
    rng: np.random.Generator,
) -> int:
    """Store every step with its own goal plus its hindsight copies.

    The achieved goal of step ``j`` is the achieved goal after taking action
    ``j``. Returns the number of transitions written.
    """

    steps = episode.steps
    if steps < 1:
        raise EmptyEpisodeError("cannot store an episode without steps")
    if episode.features is None:
        raise ValueError("episode has no observation features; imported traces cannot be replayed")

    stored = 0
    relabeled = 0
    for step in range(steps):
        buffer.add(_transition(episode, step, episode.goal, spec, relabeled=False))
        stored += 1
        for index in relabel_indices(step, steps, strategy, rng):
            substitute = episode.achieved_goals[index + 1]
            buffer.add(_transition(episode, step, substitute, spec, relabeled=True))
            relabeled += 1

    metrics.transitions_stored_total.labels(kind="original").inc(stored)
    metrics.transitions_stored_total.labels(kind="relabeled").inc(relabeled)
    return stored + relabeled


def sample_batch(buffer: ReplayBuffer, n: int, rng: np.random.Generator) -> list[Transition]:
    """Uniform sampling with replacement."""

    if buffer.size == 0:
        raise EmptyBufferError("cannot sample from an empty replay buffer")
    if n < 1:
        raise ValueError("batch size must be positive")
    return [buffer[int(index)] for index in rng.integers(0, buffer.size, size=n)]
