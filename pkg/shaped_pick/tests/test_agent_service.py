from __future__ import annotations

from dataclasses import replace

import numpy as np
import pytest

from shaped_pick.core.errors import NonFiniteLossError
from shaped_pick.core.seeding import derive_rng
from shaped_pick.models.env import Observation
from shaped_pick.models.replay import Transition
from shaped_pick.schemas.agent import DdpgHyper
from shaped_pick.services.agent_service import (
    act,
    create_agent,
    normalizer_update,
    train_batch,
    update_targets,
)
from shaped_pick.tests.conftest import make_trace
from shaped_pick.utils.normalizer import RunningNormalizer


def _transition(rng: np.random.Generator, reward: float = -1.0) -> Transition:
    return Transition(
        observation_features=rng.normal(size=14),
        action=rng.uniform(-1.0, 1.0, size=4),
        reward=reward,
        next_observation_features=rng.normal(size=14),
        goal=rng.uniform(0.0, 1.0, size=3),
        achieved_goal_next=rng.uniform(0.0, 1.0, size=3),
        gripper_pos=rng.uniform(0.0, 1.0, size=3),
        next_gripper_pos=rng.uniform(0.0, 1.0, size=3),
        success=reward > 0,
    )


def _observation(rng: np.random.Generator) -> Observation:
    return Observation(
        features=rng.uniform(0.0, 1.0, size=14),
        achieved_goal=rng.uniform(0.0, 1.0, size=3),
        desired_goal=rng.uniform(0.0, 1.0, size=3),
    )


def _small_hyper(**overrides) -> DdpgHyper:
    return DdpgHyper(hidden_sizes=(16, 16), **overrides)


def test_network_shapes_follow_goal_conditioning() -> None:
    agent = create_agent(_small_hyper(), derive_rng(0))

    assert agent.actor.layer_sizes == (17, 16, 16, 4)
    assert agent.critic.layer_sizes == (21, 16, 16, 1)
    assert agent.target_actor.layer_sizes == agent.actor.layer_sizes
    assert all(
        np.array_equal(a, b)
        for a, b in zip(agent.actor.arrays(), agent.target_actor.arrays(), strict=True)
    )


def test_greedy_action_is_deterministic_and_inside_range() -> None:
    agent = create_agent(_small_hyper(), derive_rng(1))
    rng = derive_rng(2)
    observation = _observation(rng)

    first = act(agent, observation, False, rng)
    second = act(agent, observation, False, rng)

    assert first == second
    assert all(-1.0 < value < 1.0 for value in first.as_tuple())


def test_explore_replaces_actions_at_configured_rate() -> None:
    agent = create_agent(_small_hyper(gaussian_noise_scale=0.0), derive_rng(3))
    rng = derive_rng(4)
    observation = _observation(rng)
    greedy = act(agent, observation, False, rng)

    draws = 10_000
    replaced = sum(act(agent, observation, True, rng) != greedy for _ in range(draws))

    sigma = np.sqrt(0.3 * 0.7 / draws)
    assert abs(replaced / draws - 0.3) <= 5 * sigma


def test_explore_actions_stay_in_bounds() -> None:
    agent = create_agent(_small_hyper(gaussian_noise_scale=5.0), derive_rng(3))
    rng = derive_rng(5)
    observation = _observation(rng)
    for _ in range(500):
        assert max(abs(value) for value in act(agent, observation, True, rng).as_tuple()) <= 1.0


def test_zero_critic_loss_on_single_success_transition() -> None:
    agent = create_agent(_small_hyper(), derive_rng(6), sparse_range=(-1.0, 1.0))
    agent.critic = agent.critic.zeros_like()
    agent.target_critic = agent.target_critic.zeros_like()

    stats = train_batch(agent, [_transition(derive_rng(7), reward=1.0)])

    assert stats.critic_loss == 1.0
    # zero critic: only the action penalty remains
    assert stats.actor_loss >= 0.0


@pytest.mark.parametrize("clip_return, expected", [(True, 50.0**2), (False, 981.0**2)])
def test_critic_targets_are_clipped_to_return_range(clip_return: bool, expected: float) -> None:
    agent = create_agent(
        _small_hyper(clip_return=clip_return), derive_rng(6), sparse_range=(-1.0, 1.0)
    )
    agent.critic = agent.critic.zeros_like()
    target = agent.target_critic.zeros_like()
    biases = [*target.biases[:-1], np.array([1000.0])]
    agent.target_critic = target.with_arrays(
        [array for pair in zip(target.weights, biases, strict=True) for array in pair]
    )

    stats = train_batch(agent, [_transition(derive_rng(7), reward=1.0)])

    assert stats.critic_loss == pytest.approx(expected)


def test_train_batch_leaves_targets_untouched() -> None:
    agent = create_agent(_small_hyper(), derive_rng(8))
    before = [array.copy() for array in agent.target_actor.arrays() + agent.target_critic.arrays()]
    rng = derive_rng(9)

    train_batch(agent, [_transition(rng) for _ in range(16)])

    after = agent.target_actor.arrays() + agent.target_critic.arrays()
    assert all(np.array_equal(a, b) for a, b in zip(before, after, strict=True))
    assert agent.actor_adam.step_count == 1
    assert agent.critic_adam.step_count == 1


def test_train_batch_is_deterministic() -> None:
    batch = [_transition(derive_rng(10, index)) for index in range(32)]
    first = create_agent(_small_hyper(), derive_rng(11))
    second = create_agent(_small_hyper(), derive_rng(11))

    assert train_batch(first, batch) == train_batch(second, batch)
    for a, b in zip(
        first.actor.arrays() + first.critic.arrays(),
        second.actor.arrays() + second.critic.arrays(),
        strict=True,
    ):
        assert np.array_equal(a, b)


def test_train_batch_reduces_critic_error_on_fixed_batch() -> None:
    agent = create_agent(_small_hyper(critic_lr=1e-2), derive_rng(12))
    rng = derive_rng(13)
    batch = [_transition(rng) for _ in range(32)]

    first = train_batch(agent, batch).critic_loss
    for _ in range(200):
        last = train_batch(agent, batch).critic_loss

    assert last < first


def test_non_finite_reward_halts_training() -> None:
    agent = create_agent(_small_hyper(), derive_rng(14))

    with pytest.raises(NonFiniteLossError):
        train_batch(agent, [_transition(derive_rng(15), reward=float("nan"))])


def test_empty_batch_is_rejected() -> None:
    with pytest.raises(ValueError):
        train_batch(create_agent(_small_hyper(), derive_rng(0)), [])


@pytest.mark.parametrize("polyak", [0.0, 0.95, 1.0])
def test_update_targets_blends_toward_mains(polyak: float) -> None:
    agent = create_agent(_small_hyper(polyak=polyak), derive_rng(16))
    agent.target_actor = agent.target_actor.zeros_like()
    agent.actor = agent.actor.with_arrays([np.ones_like(a) for a in agent.actor.arrays()])
    gap_before = max(
        np.max(np.abs(t - m))
        for t, m in zip(agent.target_actor.arrays(), agent.actor.arrays(), strict=True)
    )

    update_targets(agent)

    for array in agent.target_actor.arrays():
        assert np.allclose(array, 1.0 - polyak)
    gap_after = max(
        np.max(np.abs(t - m))
        for t, m in zip(agent.target_actor.arrays(), agent.actor.arrays(), strict=True)
    )
    assert gap_after <= gap_before


def test_running_normalizer_two_point_moments() -> None:
    normalizer = RunningNormalizer(size=2)
    normalizer.update(np.array([[0.0, 0.0], [2.0, 2.0]]))

    assert normalizer.mean == pytest.approx([1.0, 1.0])
    assert normalizer.std == pytest.approx([1.0, 1.0])
    assert normalizer.normalize([2.0, 2.0]) == pytest.approx([1.0, 1.0])


def test_running_normalizer_constant_stream_and_clip() -> None:
    normalizer = RunningNormalizer(size=1, clip_range=5.0)
    normalizer.update(np.full((10, 1), 3.0))

    assert normalizer.normalize([3.0]) == pytest.approx([0.0])
    assert normalizer.std[0] == 1e-2
    assert normalizer.normalize([1e6])[0] == 5.0


def test_empty_normalizer_is_identity_up_to_clip() -> None:
    normalizer = RunningNormalizer(size=3)

    assert np.array_equal(normalizer.normalize([0.5, -2.0, 9.0]), [0.5, -2.0, 5.0])


def test_normalizer_update_counts_states_and_goals() -> None:
    agent = create_agent(_small_hyper(), derive_rng(17))
    trace = make_trace([[0.1, 0.1, 0.1], [0.2, 0.2, 0.2], [0.3, 0.3, 0.3]], [0.5, 0.5, 0.5])
    trace = replace(trace, features=np.ones((3, 14)))

    normalizer_update(agent.normalizer, trace)

    assert agent.normalizer.features.count == 3
    assert agent.normalizer.goals.count == 6
    assert agent.normalizer.features.mean == pytest.approx(np.ones(14))


def test_clip_return_needs_reward_range() -> None:
    with pytest.raises(ValueError):
        create_agent(_small_hyper(clip_return=True), derive_rng(0))
