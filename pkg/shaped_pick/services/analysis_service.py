"""Trajectory diagnostics: when each goal axis is reached and how axis-aligned the path is."""

from __future__ import annotations

from collections.abc import Iterable
from pathlib import Path
from statistics import median

import numpy as np
import pandas as pd

from shaped_pick.core.errors import TraceFormatError
from shaped_pick.models.trace import EpisodeTrace
from shaped_pick.schemas.analysis import AxisSteps, Subject, TrajectoryReport

AXES = ("x", "y", "z")
TRACE_COLUMNS = (
    "step",
    "gx",
    "gy",
    "gz",
    "ox",
    "oy",
    "oz",
    "ax",
    "ay",
    "az",
    "agrip",
    "reward",
    "success",
)
DEFAULT_TOLERANCE = 0.02

__all__ = [
    "AXES",
    "DEFAULT_TOLERANCE",
    "attainment_order",
    "axis_attainment",
    "build_report",
    "export_trace",
    "first_touch_steps",
    "import_trace",
    "path_lengths",
    "sequentiality_index",
    "summarize_reports",
    "write_report",
]


def _axis_offsets(trace: EpisodeTrace, subject: Subject) -> np.ndarray:
    return np.abs(trace.positions(subject) - trace.goal)


def axis_attainment(
    trace: EpisodeTrace,
    tol: float,
    subject: Subject = "gripper",
) -> AxisSteps:
    """Per axis, the first step from which the coordinate stays within ``tol`` of the goal."""

    if not tol > 0:
        raise ValueError("tolerance must be positive")
    within = _axis_offsets(trace, subject) <= tol
    steps: list[int | None] = []
    for axis in range(3):
        held = within[:, axis]
        if not held[-1]:
            steps.append(None)
            continue
        misses = np.flatnonzero(~held)
        steps.append(int(misses[-1]) + 1 if misses.size else 0)
    return (steps[0], steps[1], steps[2])


def first_touch_steps(
    trace: EpisodeTrace,
    tol: float,
    subject: Subject = "gripper",
) -> AxisSteps:
    """Per axis, the first step at which the coordinate comes within ``tol`` at all."""

    if not tol > 0:
        raise ValueError("tolerance must be positive")
    within = _axis_offsets(trace, subject) <= tol
    steps: list[int | None] = []
    for axis in range(3):
        hits = np.flatnonzero(within[:, axis])
        steps.append(int(hits[0]) if hits.size else None)
    return (steps[0], steps[1], steps[2])


def attainment_order(steps: AxisSteps) -> tuple[str, ...]:
    """Axis names sorted by attainment step; unattained axes go last."""

    ranked = sorted(
        range(3), key=lambda axis: (steps[axis] is None, steps[axis] or 0, axis)
    )
    return tuple(AXES[axis] for axis in ranked)


def _deltas(trace: EpisodeTrace, subject: Subject) -> np.ndarray:
    return np.abs(np.diff(trace.positions(subject), axis=0))


def sequentiality_index(trace: EpisodeTrace, subject: Subject = "gripper") -> float | None:
    """Summed per-step dominant-axis motion over summed per-axis motion.

    1.0 for axis-aligned staircases, 1/3 for body-diagonal motion, ``None``
    when nothing moved.
    """

    deltas = _deltas(trace, subject)
    # row-wise sums first so an axis-aligned step contributes identically to both
    total = float(deltas.sum(axis=1).sum())
    if total == 0.0:
        return None
    return float(deltas.max(axis=1).sum()) / total


def path_lengths(trace: EpisodeTrace, subject: Subject = "gripper") -> tuple[float, float]:
    deltas = _deltas(trace, subject)
    l1 = float(deltas.sum())
    l2 = float(np.linalg.norm(deltas, axis=1).sum())
    return l1, l2


def build_report(
    trace: EpisodeTrace,
    tol: float = DEFAULT_TOLERANCE,
    subject: Subject = "gripper",
) -> TrajectoryReport:
    held = axis_attainment(trace, tol, subject)
    l1, l2 = path_lengths(trace, subject)
    return TrajectoryReport(
        subject=subject,
        tolerance=tol,
        attainment_steps=held,
        first_touch_steps=first_touch_steps(trace, tol, subject),
        attainment_order=attainment_order(held),
        sequentiality_index=sequentiality_index(trace, subject),
        l1_path_length=l1,
        l2_path_length=l2,
        final_object_goal_distance=float(
            np.linalg.norm(trace.object_positions[-1] - trace.goal)
        ),
        success=bool(trace.success_flags[-1]) if trace.steps else False,
    )


def summarize_reports(reports: Iterable[TrajectoryReport]) -> dict[str, float | int | None]:
    """Medians of the per-axis attainment steps and of the sequentiality index."""

    collected = list(reports)
    summary: dict[str, float | int | None] = {"traces": len(collected)}
    for axis, name in enumerate(AXES):
        values = [
            report.attainment_steps[axis]
            for report in collected
            if report.attainment_steps[axis] is not None
        ]
        summary[f"median_attainment_{name}"] = median(values) if values else None
    indices = [
        report.sequentiality_index
        for report in collected
        if report.sequentiality_index is not None
    ]
    summary["median_sequentiality_index"] = median(indices) if indices else None
    summary["success_rate"] = (
        sum(report.success for report in collected) / len(collected) if collected else None
    )
    return summary


def export_trace(trace: EpisodeTrace, path: Path | str) -> None:
    """Write one CSV row per visited state; row 0 has empty action and reward fields."""

    target = Path(path)
    steps = trace.steps
    actions = np.vstack([np.full((1, 4), np.nan), trace.actions])
    frame = pd.DataFrame(
        {
            "step": np.arange(steps + 1),
            "gx": trace.gripper_positions[:, 0],
            "gy": trace.gripper_positions[:, 1],
            "gz": trace.gripper_positions[:, 2],
            "ox": trace.object_positions[:, 0],
            "oy": trace.object_positions[:, 1],
            "oz": trace.object_positions[:, 2],
            "ax": actions[:, 0],
            "ay": actions[:, 1],
            "az": actions[:, 2],
            "agrip": actions[:, 3],
            "reward": np.concatenate([[np.nan], trace.rewards]),
            "success": pd.array(
                [pd.NA, *(int(flag) for flag in trace.success_flags)], dtype="Int64"
            ),
        },
        columns=list(TRACE_COLUMNS),
    )
    goal = ",".join(repr(float(value)) for value in trace.goal)
    try:
        target.parent.mkdir(parents=True, exist_ok=True)
        with target.open("w", encoding="utf-8", newline="") as handle:
            handle.write(f"# goal,{goal}\n")
            handle.write(f"# task,{trace.task}\n")
            frame.to_csv(handle, index=False, lineterminator="\n")
    except OSError as exc:
        raise OSError(f"could not write trace to {target}: {exc}") from exc


def import_trace(path: Path | str) -> EpisodeTrace:
    source = Path(path)
    try:
        lines = source.read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise OSError(f"could not read trace {source}: {exc}") from exc

    meta: dict[str, list[str]] = {}
    comment_lines = 0
    for line in lines:
        if not line.startswith("#"):
            break
        key, *values = line[1:].strip().split(",")
        meta[key] = values
        comment_lines += 1
    if "goal" not in meta or len(meta["goal"]) != 3:
        raise TraceFormatError(f"{source}: missing '# goal,<x>,<y>,<z>' line")

    try:
        frame = pd.read_csv(source, skiprows=comment_lines, float_precision="round_trip")
    except (ValueError, pd.errors.ParserError) as exc:
        raise TraceFormatError(f"{source}: {exc}") from exc
    if tuple(frame.columns) != TRACE_COLUMNS:
        raise TraceFormatError(f"{source}: unexpected header {list(frame.columns)}")
    if frame.empty:
        raise TraceFormatError(f"{source}: no rows")

    task = meta.get("task", ["pick_and_place"])[0]
    if task not in ("pick_and_place", "reach"):
        raise TraceFormatError(f"{source}: unknown task '{task}'")
    try:
        return EpisodeTrace(
            goal=np.array([float(value) for value in meta["goal"]]),
            gripper_positions=frame[["gx", "gy", "gz"]].to_numpy(dtype=np.float64),
            object_positions=frame[["ox", "oy", "oz"]].to_numpy(dtype=np.float64),
            actions=frame[["ax", "ay", "az", "agrip"]].iloc[1:].to_numpy(dtype=np.float64),
            rewards=frame["reward"].iloc[1:].to_numpy(dtype=np.float64),
            success_flags=frame["success"].iloc[1:].to_numpy(dtype=np.float64) != 0,
            task=task,
        )
    except ValueError as exc:
        raise TraceFormatError(f"{source}: {exc}") from exc


def write_report(report: TrajectoryReport, path: Path | str) -> None:
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    target.write_text(report.model_dump_json(indent=2) + "\n", encoding="utf-8")
