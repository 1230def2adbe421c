from __future__ import annotations

import json
from pathlib import Path
from typing import Any

import pandas as pd
import pytest

from shaped_pick.cli import main
from shaped_pick.core.errors import ConfigError
from shaped_pick.utils.run_config import load_train_config

CONFIG_DIR = Path(__file__).resolve().parents[2] / "configs"

TINY: dict[str, Any] = {
    "epochs": 2,
    "cycles_per_epoch": 1,
    "episodes_per_cycle": 1,
    "optimizer_steps_per_cycle": 2,
    "eval_episodes": 2,
    "seed": 3,
    "task": "reach",
    "env": {"horizon": 8},
    "reward": {"kind": "manhattan"},
    "hyper": {"batch_size": 8, "hidden_sizes": [8]},
    "checkpoint_every": 1,
}


def _write_config(directory: Path, document: dict[str, Any], name: str = "run.json") -> Path:
    path = directory / name
    path.write_text(json.dumps(document), encoding="utf-8")
    return path


def _train(tmp_path: Path, name: str, **overrides: Any) -> Path:
    config = _write_config(tmp_path, {**TINY, **overrides}, f"{name}.json")
    out = tmp_path / name
    assert main(["train", "--config", str(config), "--out", str(out)]) == 0
    return out


def test_missing_reward_kind_is_named(tmp_path: Path, capsys: pytest.CaptureFixture[str]) -> None:
    config = _write_config(tmp_path, {**TINY, "reward": {"living_cost": -1.0}})

    code = main(["train", "--config", str(config), "--out", str(tmp_path / "run")])

    assert code == 1
    assert "reward.kind" in capsys.readouterr().err


def test_unknown_keys_are_rejected(tmp_path: Path) -> None:
    config = _write_config(tmp_path, {**TINY, "hyper": {"gama": 0.9}})

    with pytest.raises(ConfigError) as excinfo:
        load_train_config(config)

    assert excinfo.value.key == "hyper.gama"


def test_persisted_config_materializes_defaults_and_seed_override(tmp_path: Path) -> None:
    config = _write_config(tmp_path, TINY)
    out = tmp_path / "run"

    assert main(["train", "--config", str(config), "--out", str(out), "--seed", "11"]) == 0

    persisted = json.loads((out / "config.json").read_text(encoding="utf-8"))
    assert persisted["seed"] == 11
    assert persisted["reward"]["penalties"] == [5.0, 2.5, 1.0]
    assert persisted["hyper"]["clip_return"] is False
    assert persisted["strategy"] == {"k": 4, "kind": "future"}
    assert load_train_config(out / "config.json").seed == 11


@pytest.mark.parametrize("path", sorted(CONFIG_DIR.glob("*.json")), ids=lambda path: path.stem)
def test_shipped_configs_parse(path: Path) -> None:
    config = load_train_config(path)

    assert config.reward.kind in path.stem
    if path.stem.startswith("pick_lite_"):
        assert config.env.object_in_hand_probability == 0.5
        assert config.env.gripper_start_height == (0.05, 0.25)


def test_default_output_goes_under_run_root(
    tmp_path: Path, monkeypatch: pytest.MonkeyPatch
) -> None:
    monkeypatch.setenv("SHAPED_PICK_RUN_ROOT", str(tmp_path / "root"))
    config = _write_config(tmp_path, TINY, "tiny.json")

    assert main(["train", "--config", str(config)]) == 0

    assert (tmp_path / "root" / "tiny_seed3" / "metrics.csv").exists()


@pytest.mark.e2e
def test_repeated_training_is_byte_identical(tmp_path: Path) -> None:
    first = _train(tmp_path, "first")
    second = _train(tmp_path, "second")

    assert (first / "metrics.csv").read_bytes() == (second / "metrics.csv").read_bytes()
    assert (first / "checkpoints" / "epoch_1.json").read_bytes() == (
        second / "checkpoints" / "epoch_1.json"
    ).read_bytes()


@pytest.mark.e2e
def test_rollout_writes_traces_and_reports(tmp_path: Path) -> None:
    run = _train(tmp_path, "run")
    checkpoint = run / "checkpoints" / "epoch_1.json"

    assert main(["rollout", "--checkpoint", str(checkpoint), "--n", "3", "--seed", "4"]) == 0
    assert main(
        [
            "rollout",
            "--checkpoint",
            str(checkpoint),
            "--n",
            "3",
            "--seed",
            "4",
            "--out",
            str(tmp_path / "again"),
        ]
    ) == 0

    traces = sorted((run / "traces").glob("*.csv"))
    reports = sorted((run / "traces").glob("*.json"))
    assert len(traces) == 3
    assert len(reports) == 3
    for trace in traces:
        assert trace.read_bytes() == (tmp_path / "again" / trace.name).read_bytes()


@pytest.mark.e2e
def test_rollout_rejects_task_mismatch(
    tmp_path: Path, capsys: pytest.CaptureFixture[str]
) -> None:
    run = _train(tmp_path, "run")
    pick = _write_config(tmp_path, {**TINY, "task": "pick_and_place"}, "pick.json")

    code = main(
        [
            "rollout",
            "--checkpoint",
            str(run / "checkpoints" / "epoch_1.json"),
            "--config",
            str(pick),
            "--n",
            "1",
        ]
    )

    assert code == 1
    assert "task" in capsys.readouterr().err


@pytest.mark.e2e
def test_compare_tabulates_runs(tmp_path: Path, capsys: pytest.CaptureFixture[str]) -> None:
    first = _train(tmp_path, "alpha")
    second = _train(tmp_path, "beta", seed=4)
    checkpoint = str(first / "checkpoints" / "epoch_1.json")
    assert main(["rollout", "--checkpoint", checkpoint, "--n", "2"]) == 0
    out = tmp_path / "compare"

    code = main(
        [
            "compare",
            str(first),
            str(second),
            "--threshold",
            "1.0",
            "--window",
            "5",
            "--out",
            str(out),
        ]
    )

    assert code == 0
    table = pd.read_csv(out / "comparison.csv", keep_default_na=False)
    assert table["run"].tolist() == ["alpha", "beta"]
    # two epochs can never fill a five-epoch window
    assert table["convergence_epoch"].tolist() == ["-", "-"]
    assert table["mean_sequentiality_index"].tolist()[1] == "-"
    assert table["mean_sequentiality_index"].tolist()[0] != "-"
    merged = pd.read_csv(out / "eval_success.csv")
    assert merged.columns.tolist() == ["epoch", "alpha", "beta"]
    assert "alpha" in capsys.readouterr().out


def test_compare_reports_converged_run(tmp_path: Path) -> None:
    run = tmp_path / "done"
    run.mkdir()
    pd.DataFrame(
        {
            "epoch": [0, 1, 2],
            "train_success": [0.0, 1.0, 1.0],
            "eval_success": [0.0, 1.0, 1.0],
            "critic_loss": [1.0, 0.5, 0.2],
            "actor_loss": [0.1, 0.1, 0.1],
            "wall_seconds": [0.0, 0.0, 0.0],
        }
    ).to_csv(run / "metrics.csv", index=False)

    code = main(
        ["compare", str(run), "--threshold", "0.9", "--window", "2", "--out", str(tmp_path / "c")]
    )

    assert code == 0
    table = pd.read_csv(tmp_path / "c" / "comparison.csv", keep_default_na=False)
    assert table["convergence_epoch"].tolist() == [1]
    assert table["final_eval_success"].tolist() == [1.0]


def test_compare_names_missing_metrics(
    tmp_path: Path, capsys: pytest.CaptureFixture[str]
) -> None:
    code = main(["compare", str(tmp_path / "nowhere"), "--out", str(tmp_path / "c")])

    assert code == 1
    assert "metrics.csv" in capsys.readouterr().err


@pytest.mark.e2e
def test_analyze_rebuilds_reports_and_summary(tmp_path: Path) -> None:
    run = _train(tmp_path, "run")
    checkpoint = str(run / "checkpoints" / "epoch_1.json")
    assert main(["rollout", "--checkpoint", checkpoint, "--n", "2"]) == 0
    out = tmp_path / "analysis"

    assert main(["analyze", str(run / "traces"), "--subject", "gripper", "--out", str(out)]) == 0

    assert sorted(p.name for p in out.iterdir()) == [
        "summary.json",
        "trace_000.json",
        "trace_001.json",
    ]
    summary = json.loads((out / "summary.json").read_text(encoding="utf-8"))
    assert summary["traces"] == 2


def test_analyze_without_traces_fails(tmp_path: Path) -> None:
    assert main(["analyze", str(tmp_path / "missing.csv")]) == 1
