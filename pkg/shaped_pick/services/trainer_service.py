"""Epoch / cycle / episode training loop with periodic greedy evaluation.

Every random draw comes from a stream derived from the run seed and the
position in the schedule, so a run is a pure function of its config.
"""

from __future__ import annotations

import time
from collections.abc import Sequence
from dataclasses import dataclass, field
from pathlib import Path
from typing import Protocol

import numpy as np
import pandas as pd
from joblib import Parallel, delayed

from shaped_pick.core import metrics
from shaped_pick.core.errors import NonFiniteLossError
from shaped_pick.core.logging_config import get_logger, log_event, run_context
from shaped_pick.core.seeding import (
    STREAM_EVAL,
    STREAM_INIT,
    STREAM_RELABEL,
    STREAM_ROLLOUT,
    STREAM_SAMPLE,
    derive_rng,
)
from shaped_pick.models.env import Action, Observation
from shaped_pick.models.trace import EpisodeTrace
from shaped_pick.schemas.train import METRICS_COLUMNS, EpochMetrics, RunMetrics, TrainConfig
from shaped_pick.services import checkpoint_service, env_service
from shaped_pick.services.agent_service import (
    DdpgAgent,
    create_agent,
    normalizer_update,
    train_batch,
    update_targets,
)
from shaped_pick.services.replay_service import ReplayBuffer, sample_batch, store_episode
from shaped_pick.services.reward_service import RewardInput, compute, reward_bounds
from shaped_pick.utils.run_config import CONFIG_FILENAME, dump_config

METRICS_FILENAME = "metrics.csv"

__all__ = [
    "METRICS_FILENAME",
    "Policy",
    "TrainingSession",
    "convergence_epoch",
    "evaluate",
    "rollout_episode",
    "run",
]


class Policy(Protocol):
    def act(self, observation: Observation, explore: bool, rng: np.random.Generator) -> Action: ...


def rollout_episode(
    policy: Policy,
    config: TrainConfig,
    rng: np.random.Generator,
    explore: bool,
) -> EpisodeTrace:
    """Play one full-horizon episode; episodes never terminate early.

    Exploratory episodes may start with the object in hand, greedy ones never do.
    """

    env_cfg = config.env
    state, goal = env_service.reset(env_cfg, rng, config.task, training=explore)
    observation = env_service.observe(state, goal, config.task)

    grippers = [state.gripper_pos]
    objects = [state.object_pos]
    features = [observation.features]
    actions = []
    rewards = []
    successes = []
    for _ in range(env_cfg.horizon):
        action = policy.act(observation, explore, rng).clamped()
        result = env_service.step(state, action, env_cfg, goal, config.task)
        state = result.state
        observation = env_service.observe(state, goal, config.task)
        rewards.append(
            compute(
                config.reward,
                RewardInput(
                    gripper_pos=state.gripper_pos,
                    achieved_goal=result.achieved_goal,
                    desired_goal=goal,
                ),
            )
        )
        actions.append(action.as_array())
        successes.append(result.success)
        grippers.append(state.gripper_pos)
        objects.append(state.object_pos)
        features.append(observation.features)

    return EpisodeTrace(
        goal=goal,
        gripper_positions=np.array(grippers),
        object_positions=np.array(objects),
        actions=np.array(actions).reshape(-1, 4),
        rewards=np.array(rewards, dtype=np.float64),
        success_flags=np.array(successes, dtype=bool),
        task=config.task,
        features=np.array(features),
    )


def _greedy_success(policy: Policy, config: TrainConfig, rng: np.random.Generator) -> bool:
    trace = rollout_episode(policy, config, rng, explore=False)
    return bool(trace.success_flags[-1])


def evaluate(
    policy: Policy,
    config: TrainConfig,
    n: int,
    rng: np.random.Generator,
) -> float:
    """Success rate over ``n`` greedy episodes on fresh goals.

    Each episode draws from its own child stream, so the rate does not depend
    on ``config.eval_workers``.
    """

    if n < 1:
        raise ValueError("evaluation needs at least one episode")
    children = rng.spawn(n)
    if config.eval_workers > 1 and n > 1:
        outcomes = Parallel(n_jobs=min(config.eval_workers, n))(
            delayed(_greedy_success)(policy, config, child) for child in children
        )
    else:
        outcomes = [_greedy_success(policy, config, child) for child in children]

    metrics.episodes_total.labels(phase="eval").inc(n)
    metrics.env_steps_total.labels(phase="eval").inc(n * config.env.horizon)
    return sum(bool(outcome) for outcome in outcomes) / n


def convergence_epoch(series: Sequence[float], threshold: float, window: int) -> int | None:
    """First epoch whose trailing ``window``-epoch mean reaches ``threshold``."""

    if window < 1:
        raise ValueError("window must be at least 1")
    if not 0 < threshold <= 1:
        raise ValueError("threshold must lie in (0, 1]")
    values = np.asarray(series, dtype=np.float64)
    if values.size < window:
        return None
    means = np.lib.stride_tricks.sliding_window_view(values, window).mean(axis=1)
    hits = np.flatnonzero(means >= threshold)
    return int(hits[0]) if hits.size else None


@dataclass(slots=True)
class TrainingSession:
    """Mutable state of one run: agent, replay buffer and the metrics so far."""

    config: TrainConfig
    agent: DdpgAgent
    buffer: ReplayBuffer
    run_dir: Path | None = None
    metrics: RunMetrics = field(default_factory=RunMetrics)

    @classmethod
    def create(cls, config: TrainConfig, run_dir: Path | str | None = None) -> TrainingSession:
        agent = create_agent(
            config.hyper,
            derive_rng(config.seed, STREAM_INIT),
            sparse_range=reward_bounds(config.reward),
        )
        session = cls(
            config=config,
            agent=agent,
            buffer=ReplayBuffer(config.replay_capacity),
            run_dir=Path(run_dir) if run_dir is not None else None,
        )
        if session.run_dir is not None:
            session.run_dir.mkdir(parents=True, exist_ok=True)
            dump_config(config, session.run_dir / CONFIG_FILENAME)
            pd.DataFrame(columns=list(METRICS_COLUMNS)).to_csv(
                session.run_dir / METRICS_FILENAME, index=False, lineterminator="\n"
            )
        return session

    def _collect(self, epoch: int, cycle: int) -> int:
        config = self.config
        successes = 0
        for episode in range(config.episodes_per_cycle):
            trace = rollout_episode(
                self.agent,
                config,
                derive_rng(config.seed, STREAM_ROLLOUT, epoch, cycle, episode),
                explore=True,
            )
            successes += bool(trace.success_flags[-1])
            store_episode(
                self.buffer,
                trace,
                config.strategy,
                config.reward,
                derive_rng(config.seed, STREAM_RELABEL, epoch, cycle, episode),
            )
            normalizer_update(self.agent.normalizer, trace)

        metrics.episodes_total.labels(phase="train").inc(config.episodes_per_cycle)
        metrics.env_steps_total.labels(phase="train").inc(
            config.episodes_per_cycle * config.env.horizon
        )
        return successes

    def _optimize(self, epoch: int, cycle: int) -> tuple[list[float], list[float]]:
        config = self.config
        sample_rng = derive_rng(config.seed, STREAM_SAMPLE, epoch, cycle)
        critic_losses = []
        actor_losses = []
        for _ in range(config.optimizer_steps_per_cycle):
            batch = sample_batch(self.buffer, config.hyper.batch_size, sample_rng)
            try:
                stats = train_batch(self.agent, batch)
            except NonFiniteLossError as exc:
                raise exc.with_epoch(epoch) from exc
            critic_losses.append(stats.critic_loss)
            actor_losses.append(stats.actor_loss)
        update_targets(self.agent)
        metrics.optimizer_steps_total.inc(config.optimizer_steps_per_cycle)
        return critic_losses, actor_losses

    def run_epoch(self, epoch: int) -> EpochMetrics:
        config = self.config
        started = time.perf_counter()
        successes = 0
        critic_losses: list[float] = []
        actor_losses: list[float] = []
        for cycle in range(config.cycles_per_epoch):
            successes += self._collect(epoch, cycle)
            critic, actor = self._optimize(epoch, cycle)
            critic_losses.extend(critic)
            actor_losses.extend(actor)

        eval_rate = evaluate(
            self.agent, config, config.eval_episodes, derive_rng(config.seed, STREAM_EVAL, epoch)
        )
        duration = time.perf_counter() - started
        row = EpochMetrics(
            epoch=epoch,
            train_success=successes / (config.cycles_per_epoch * config.episodes_per_cycle),
            eval_success=eval_rate,
            critic_loss=float(np.mean(critic_losses)),
            actor_loss=float(np.mean(actor_losses)),
            wall_seconds=duration if config.record_wall_time else 0.0,
        )
        self.metrics.append(row)
        metrics.epoch_duration_seconds.observe(duration)
        metrics.eval_success_rate.set(eval_rate)

        if self.run_dir is not None:
            self._write_row(row)
            last = epoch == config.epochs - 1
            if last or (epoch + 1) % config.checkpoint_every == 0:
                path = checkpoint_service.save_checkpoint(
                    self.agent,
                    checkpoint_service.checkpoint_path(self.run_dir, epoch),
                    epoch=epoch,
                    task=config.task,
                    reward=config.reward,
                )
                log_event(
                    get_logger(),
                    service="trainer",
                    event="checkpoint_written",
                    epoch=epoch,
                    path=str(path),
                )

        log_event(
            get_logger(),
            service="trainer",
            event="epoch_completed",
            epoch=epoch,
            train_success=row.train_success,
            eval_success=row.eval_success,
            critic_loss=row.critic_loss,
            actor_loss=row.actor_loss,
            seconds=round(duration, 3),
        )
        return row

    def _write_row(self, row: EpochMetrics) -> None:
        assert self.run_dir is not None
        frame = pd.DataFrame([row.model_dump()], columns=list(METRICS_COLUMNS))
        frame.to_csv(
            self.run_dir / METRICS_FILENAME,
            mode="a",
            header=False,
            index=False,
            lineterminator="\n",
        )


def run(config: TrainConfig, run_dir: Path | str | None = None) -> RunMetrics:
    """Train for ``config.epochs`` epochs; metrics rows are flushed as they complete."""

    with run_context(seed=config.seed, reward=config.reward.kind, task=config.task):
        logger = get_logger()
        log_event(
            logger,
            service="trainer",
            event="run_started",
            epochs=config.epochs,
            run_dir=str(run_dir) if run_dir is not None else None,
        )
        session = TrainingSession.create(config, run_dir)
        for epoch in range(config.epochs):
            try:
                session.run_epoch(epoch)
            except NonFiniteLossError as exc:
                log_event(
                    logger,
                    service="trainer",
                    event="run_halted",
                    level="error",
                    epoch=exc.epoch,
                    error=str(exc),
                )
                raise
    return session.metrics
