"""Command-line entry point: train, rollout, compare and analyze run directories."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from collections.abc import Sequence
from pathlib import Path

import numpy as np
import pandas as pd

from shaped_pick.core.config import settings
from shaped_pick.core.errors import ConfigError, MissingArtifactError, ShapedPickError
from shaped_pick.core.logging_config import get_logger, log_event
from shaped_pick.core.seeding import STREAM_EVAL, derive_rng
from shaped_pick.schemas.analysis import Subject
from shaped_pick.services import analysis_service, checkpoint_service, trainer_service
from shaped_pick.utils.run_config import CONFIG_FILENAME, load_train_config

LOGGER = logging.getLogger(__name__)

TRACES_DIRNAME = "traces"
COMPARISON_FILENAME = "comparison.csv"
MERGED_FILENAME = "eval_success.csv"
SUMMARY_FILENAME = "summary.json"

__all__ = ["build_parser", "cmd_analyze", "cmd_compare", "cmd_rollout", "cmd_train", "main"]


def cmd_train(
    config_path: Path | str,
    out_dir: Path | str | None = None,
    seed_override: int | None = None,
) -> int:
    try:
        config = load_train_config(config_path, seed_override=seed_override)
    except ConfigError as exc:
        log_event(
            get_logger(), service="cli", event="config_invalid", level="error", key=exc.key
        )
        raise
    target = (
        Path(out_dir)
        if out_dir is not None
        else settings.RUN_ROOT / f"{Path(config_path).stem}_seed{config.seed}"
    )
    trainer_service.run(config, target)
    print(f"run written to {target}")
    return 0


def _config_for_checkpoint(checkpoint_path: Path, config_path: Path | str | None) -> Path:
    if config_path is not None:
        return Path(config_path)
    candidate = checkpoint_path.resolve().parent.parent / CONFIG_FILENAME
    if not candidate.exists():
        raise MissingArtifactError(
            f"no {CONFIG_FILENAME} beside {checkpoint_path}; pass --config explicitly"
        )
    return candidate


def cmd_rollout(
    checkpoint_path: Path | str,
    n: int,
    out_dir: Path | str | None = None,
    seed: int = 0,
    *,
    config_path: Path | str | None = None,
    tol: float = analysis_service.DEFAULT_TOLERANCE,
) -> int:
    """Record ``n`` greedy episodes as trace CSVs with a report JSON beside each."""

    if n < 1:
        raise ValueError("--n must be at least 1")
    source = Path(checkpoint_path)
    checkpoint = checkpoint_service.load_checkpoint(source)
    config = load_train_config(_config_for_checkpoint(source, config_path))
    checkpoint_service.check_compatible(checkpoint, config)

    target = (
        Path(out_dir)
        if out_dir is not None
        else source.resolve().parent.parent / TRACES_DIRNAME
    )
    target.mkdir(parents=True, exist_ok=True)
    for index, rng in enumerate(derive_rng(seed, STREAM_EVAL).spawn(n)):
        trace = trainer_service.rollout_episode(checkpoint.agent, config, rng, explore=False)
        trace_path = target / f"trace_{index:03d}.csv"
        analysis_service.export_trace(trace, trace_path)
        analysis_service.write_report(
            analysis_service.build_report(trace, tol), trace_path.with_suffix(".json")
        )

    log_event(
        get_logger(),
        service="cli",
        event="rollout_written",
        checkpoint=str(source),
        episodes=n,
        out=str(target),
    )
    print(f"{n} traces written to {target}")
    return 0


def _run_name(run_dir: Path, taken: set[str]) -> str:
    name = run_dir.resolve().name
    candidate = name
    suffix = 2
    while candidate in taken:
        candidate = f"{name}_{suffix}"
        suffix += 1
    taken.add(candidate)
    return candidate


def _mean_sequentiality(run_dir: Path) -> float | None:
    indices = []
    for trace_path in sorted((run_dir / TRACES_DIRNAME).glob("*.csv")):
        index = analysis_service.sequentiality_index(analysis_service.import_trace(trace_path))
        if index is not None:
            indices.append(index)
    return float(np.mean(indices)) if indices else None


def cmd_compare(
    run_dirs: Sequence[Path | str],
    threshold: float = 0.9,
    window: int = 5,
    out_dir: Path | str | None = None,
) -> int:
    if not run_dirs:
        raise ValueError("compare needs at least one run directory")

    rows = []
    merged: pd.DataFrame | None = None
    taken: set[str] = set()
    for entry in run_dirs:
        run_dir = Path(entry)
        metrics_path = run_dir / trainer_service.METRICS_FILENAME
        if not metrics_path.exists():
            raise MissingArtifactError(f"missing {metrics_path}")
        frame = pd.read_csv(metrics_path, float_precision="round_trip")
        name = _run_name(run_dir, taken)
        series = frame["eval_success"].tolist()
        rows.append(
            {
                "run": name,
                "convergence_epoch": trainer_service.convergence_epoch(series, threshold, window),
                "final_eval_success": series[-1] if series else None,
                "mean_sequentiality_index": _mean_sequentiality(run_dir),
            }
        )
        column = frame[["epoch", "eval_success"]].rename(columns={"eval_success": name})
        merged = column if merged is None else merged.merge(column, on="epoch", how="outer")

    table = pd.DataFrame(rows)
    table["convergence_epoch"] = table["convergence_epoch"].astype("Int64")
    assert merged is not None
    merged = merged.sort_values("epoch").reset_index(drop=True)

    target = Path(out_dir) if out_dir is not None else settings.RUN_ROOT / "compare"
    target.mkdir(parents=True, exist_ok=True)
    table.to_csv(target / COMPARISON_FILENAME, index=False, na_rep="-", lineterminator="\n")
    merged.to_csv(target / MERGED_FILENAME, index=False, lineterminator="\n")

    print(table.to_string(index=False, na_rep="-"))
    log_event(
        get_logger(),
        service="cli",
        event="compare_written",
        runs=len(rows),
        threshold=threshold,
        window=window,
        out=str(target),
    )
    return 0


def _trace_files(paths: Sequence[Path | str]) -> list[Path]:
    files: list[Path] = []
    for entry in paths:
        path = Path(entry)
        if path.is_dir():
            files.extend(sorted(path.glob("*.csv")))
        elif path.exists():
            files.append(path)
        else:
            raise MissingArtifactError(f"no trace at {path}")
    if not files:
        raise MissingArtifactError("no trace CSVs found")
    return files


def cmd_analyze(
    paths: Sequence[Path | str],
    tol: float = analysis_service.DEFAULT_TOLERANCE,
    subject: Subject = "gripper",
    out_dir: Path | str | None = None,
) -> int:
    """Re-run the trajectory diagnostics over existing trace CSVs."""

    files = _trace_files(paths)
    reports = []
    for trace_path in files:
        report = analysis_service.build_report(
            analysis_service.import_trace(trace_path), tol, subject
        )
        reports.append(report)
        destination = (
            Path(out_dir) / f"{trace_path.stem}.json"
            if out_dir is not None
            else trace_path.with_suffix(".json")
        )
        analysis_service.write_report(report, destination)

    summary = analysis_service.summarize_reports(reports)
    summary_dir = Path(out_dir) if out_dir is not None else files[0].parent
    summary_dir.mkdir(parents=True, exist_ok=True)
    (summary_dir / SUMMARY_FILENAME).write_text(
        json.dumps(summary, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    print(json.dumps(summary, sort_keys=True))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="shaped_pick",
        description="Reward-shaped DDPG+HER pick-and-place experiments.",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    train = commands.add_parser("train", help="train one run from a JSON config")
    train.add_argument("--config", required=True, type=Path)
    train.add_argument("--out", type=Path, default=None)
    train.add_argument("--seed", type=int, default=None)

    rollout = commands.add_parser("rollout", help="record greedy episodes from a checkpoint")
    rollout.add_argument("--checkpoint", required=True, type=Path)
    rollout.add_argument("--n", type=int, default=20)
    rollout.add_argument("--out", type=Path, default=None)
    rollout.add_argument("--seed", type=int, default=0)
    rollout.add_argument("--config", type=Path, default=None)
    rollout.add_argument("--tol", type=float, default=analysis_service.DEFAULT_TOLERANCE)

    compare = commands.add_parser("compare", help="tabulate convergence across runs")
    compare.add_argument("runs", nargs="+", type=Path)
    compare.add_argument("--threshold", type=float, default=0.9)
    compare.add_argument("--window", type=int, default=5)
    compare.add_argument("--out", type=Path, default=None)

    analyze = commands.add_parser("analyze", help="trajectory reports for trace CSVs")
    analyze.add_argument("traces", nargs="+", type=Path)
    analyze.add_argument("--tol", type=float, default=analysis_service.DEFAULT_TOLERANCE)
    analyze.add_argument("--subject", choices=("gripper", "object"), default="gripper")
    analyze.add_argument("--out", type=Path, default=None)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "train":
            return cmd_train(args.config, args.out, args.seed)
        if args.command == "rollout":
            return cmd_rollout(
                args.checkpoint,
                args.n,
                args.out,
                args.seed,
                config_path=args.config,
                tol=args.tol,
            )
        if args.command == "compare":
            return cmd_compare(args.runs, args.threshold, args.window, args.out)
        return cmd_analyze(args.traces, args.tol, args.subject, args.out)
    except (ShapedPickError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
