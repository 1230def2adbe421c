"""Exact planning on a discretized reach task.

The gripper lives on an ``n x n x n`` lattice and moves one cell along one axis
per step. The goal cell is absorbing and pays the success reward forever, every
other cell pays the shaped reward for entering it. Value iteration gives the
optimal plan for any reward spec; small grids can also be brute-forced over
all monotone shortest paths to check the dynamic program.
"""

from __future__ import annotations

import logging
from collections.abc import Iterator, Sequence
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from shaped_pick.models.trace import EpisodeTrace
from shaped_pick.schemas.rewards import RewardSpec
from shaped_pick.services.reward_service import compute_many

LOGGER = logging.getLogger(__name__)

Cell = tuple[int, int, int]

# +x, -x, +y, -y, +z, -z; ties in the greedy walk resolve in this order
MOVES: tuple[Cell, ...] = (
    (1, 0, 0),
    (-1, 0, 0),
    (0, 1, 0),
    (0, -1, 0),
    (0, 0, 1),
    (0, 0, -1),
)
_TIE_TOLERANCE = 1e-12

__all__ = [
    "Cell",
    "GridSolution",
    "GridWorld",
    "MOVES",
    "best_monotone_path",
    "greedy_path",
    "monotone_paths",
    "path_return",
    "path_to_trace",
    "value_iteration",
]


@dataclass(frozen=True, slots=True)
class GridWorld:
    size: int
    spacing: float = 0.1
    origin: tuple[float, float, float] = (0.1, 0.1, 0.1)

    def __post_init__(self) -> None:
        if self.size < 2:
            raise ValueError("grid needs at least two cells per axis")
        if self.spacing <= 0:
            raise ValueError("spacing must be positive")

    def contains(self, cell: Sequence[int]) -> bool:
        return all(0 <= index < self.size for index in cell)

    def position(self, cell: Sequence[int]) -> NDArray[np.float64]:
        return np.asarray(self.origin) + self.spacing * np.asarray(cell, dtype=np.float64)

    def positions(self) -> NDArray[np.float64]:
        """Cell centres as an (n, n, n, 3) array."""

        axis = np.arange(self.size, dtype=np.float64)
        grid = np.stack(np.meshgrid(axis, axis, axis, indexing="ij"), axis=-1)
        return np.asarray(self.origin) + self.spacing * grid


@dataclass(frozen=True, slots=True, eq=False)
class GridSolution:
    world: GridWorld
    goal: Cell
    spec: RewardSpec
    gamma: float
    rewards: NDArray[np.float64]
    values: NDArray[np.float64]
    iterations: int


def _entry_rewards(world: GridWorld, goal: Cell, spec: RewardSpec) -> NDArray[np.float64]:
    cells = world.positions().reshape(-1, 3)
    desired = np.broadcast_to(world.position(goal), cells.shape)
    # reach task: the achieved goal is the gripper itself
    rewards, _ = compute_many(spec, cells, cells, desired)
    return rewards.reshape((world.size,) * 3)


def _shifted(values: NDArray[np.float64], move: Cell) -> NDArray[np.float64]:
    """``out[c] = values[c + move]``; cells whose neighbour is off-grid get -inf."""

    out = np.full(values.shape, -np.inf)
    target = [slice(None)] * 3
    source = [slice(None)] * 3
    for axis, offset in enumerate(move):
        if offset > 0:
            target[axis] = slice(0, -offset)
            source[axis] = slice(offset, None)
        elif offset < 0:
            target[axis] = slice(-offset, None)
            source[axis] = slice(0, offset)
    out[tuple(target)] = values[tuple(source)]
    return out


def value_iteration(
    world: GridWorld,
    goal: Cell,
    spec: RewardSpec,
    gamma: float = 0.98,
    tol: float = 1e-10,
    max_iterations: int = 100_000,
) -> GridSolution:
    if not world.contains(goal):
        raise ValueError(f"goal {goal} lies outside the grid")
    if not 0 < gamma < 1:
        raise ValueError("gamma must lie in (0, 1)")

    rewards = _entry_rewards(world, goal, spec)
    absorbing = rewards[goal] / (1.0 - gamma)
    values = np.zeros_like(rewards)
    values[goal] = absorbing

    for iteration in range(1, max_iterations + 1):
        backup = rewards + gamma * values
        updated = np.max([_shifted(backup, move) for move in MOVES], axis=0)
        updated[goal] = absorbing
        change = float(np.max(np.abs(updated - values)))
        values = updated
        if change < tol:
            break
    else:
        LOGGER.warning(
            "value_iteration_not_converged",
            extra={"iterations": max_iterations, "change": change},
        )

    return GridSolution(
        world=world,
        goal=goal,
        spec=spec,
        gamma=gamma,
        rewards=rewards,
        values=values,
        iterations=iteration,
    )


def greedy_path(solution: GridSolution, start: Cell, max_steps: int | None = None) -> list[Cell]:
    """Follow the optimal action from ``start`` until the goal is entered."""

    world = solution.world
    if not world.contains(start):
        raise ValueError(f"start {start} lies outside the grid")
    limit = max_steps if max_steps is not None else world.size**3
    backup = solution.rewards + solution.gamma * solution.values

    path = [start]
    cell = start
    while cell != solution.goal:
        if len(path) > limit:
            raise RuntimeError(f"greedy walk did not reach the goal within {limit} steps")
        best_cell: Cell | None = None
        best_value = -np.inf
        for move in MOVES:
            candidate = (cell[0] + move[0], cell[1] + move[1], cell[2] + move[2])
            if not world.contains(candidate):
                continue
            if backup[candidate] > best_value + _TIE_TOLERANCE:
                best_cell, best_value = candidate, float(backup[candidate])
        assert best_cell is not None
        cell = best_cell
        path.append(cell)
    return path


def path_return(
    world: GridWorld,
    path: Sequence[Cell],
    goal: Cell,
    spec: RewardSpec,
    gamma: float = 0.98,
) -> float:
    """Discounted return of walking ``path`` and then resting on the goal forever."""

    if tuple(path[-1]) != tuple(goal):
        raise ValueError("path must end on the goal")
    cells = np.array([world.position(cell) for cell in path[1:]]).reshape(-1, 3)
    desired = np.broadcast_to(world.position(goal), cells.shape)
    rewards, _ = compute_many(spec, cells, cells, desired)
    discounts = gamma ** np.arange(len(rewards))
    goal_reward, _ = compute_many(
        spec, world.position(goal)[None], world.position(goal)[None], world.position(goal)[None]
    )
    tail = gamma ** len(rewards) * float(goal_reward[0]) / (1.0 - gamma)
    return float(np.dot(discounts, rewards)) + tail


def monotone_paths(start: Cell, goal: Cell) -> Iterator[list[Cell]]:
    """Every shortest one-axis-per-step path from ``start`` to ``goal``."""

    remaining = [abs(goal[axis] - start[axis]) for axis in range(3)]
    signs = [int(np.sign(goal[axis] - start[axis])) for axis in range(3)]

    def _extend(cell: Cell, left: list[int]) -> Iterator[list[Cell]]:
        if not any(left):
            yield [cell]
            return
        for axis in range(3):
            if left[axis] == 0:
                continue
            step = list(cell)
            step[axis] += signs[axis]
            left[axis] -= 1
            for tail in _extend((step[0], step[1], step[2]), left):
                yield [cell, *tail]
            left[axis] += 1

    yield from _extend(start, remaining)


def best_monotone_path(
    world: GridWorld,
    start: Cell,
    goal: Cell,
    spec: RewardSpec,
    gamma: float = 0.98,
) -> tuple[list[Cell], float]:
    """Brute force over all monotone shortest paths; first best wins ties."""

    best_path: list[Cell] = []
    best_return = -np.inf
    for path in monotone_paths(start, goal):
        value = path_return(world, path, goal, spec, gamma)
        if value > best_return + _TIE_TOLERANCE:
            best_path, best_return = path, value
    return best_path, best_return


def path_to_trace(
    world: GridWorld,
    path: Sequence[Cell],
    goal: Cell,
    spec: RewardSpec,
) -> EpisodeTrace:
    """Lattice path as a reach-task trace so the trajectory diagnostics apply."""

    grippers = np.array([world.position(cell) for cell in path])
    desired = world.position(goal)
    moves = np.diff(np.asarray(path, dtype=np.float64), axis=0)
    actions = np.hstack([moves, np.ones((len(moves), 1))])
    targets = np.broadcast_to(desired, grippers[1:].shape)
    rewards, success = compute_many(spec, grippers[1:], grippers[1:], targets)
    # the object stays on the table under the start cell
    resting = np.array([*grippers[0][:2], 0.02])
    return EpisodeTrace(
        goal=desired,
        gripper_positions=grippers,
        object_positions=np.broadcast_to(resting, grippers.shape).copy(),
        actions=actions,
        rewards=rewards,
        success_flags=success,
        task="reach",
    )
