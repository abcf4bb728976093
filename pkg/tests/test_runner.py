"""Batch driver and command-line front end."""
from __future__ import annotations

import json

import pytest

from causal_horizon.cli import main
from causal_horizon.io import save_json
from causal_horizon.runner import DEMOS, run
from causal_horizon.schemas import ExperimentConfig, PosetDoc, RelationDoc, RunResult


@pytest.fixture
def out(tmp_path, monkeypatch):
    monkeypatch.setenv("CAUSAL_HORIZON_OUT", str(tmp_path / "out"))
    return tmp_path / "out"


def test_unknown_subcommand_is_a_usage_error(out):
    result = run("plot", ExperimentConfig())
    assert result.exit_code == 2
    assert "Unknown subcommand" in result.message


def test_unknown_space_is_a_usage_error(out):
    result = run("ladder", ExperimentConfig(space="torus"))
    assert result.exit_code == 2
    assert "Unknown space" in result.message
    assert (out / "ladder" / "run.json").is_file()


def test_explicit_relation_fails_validation(out, tmp_path):
    doc = save_json(tmp_path / "empty.json", RelationDoc(points=[0, 1, 2]))
    result = run("validate", ExperimentConfig(input=str(doc)))
    assert result.exit_code == 1 and not result.ok
    assert result.verdicts["connex"] is False
    saved = RunResult.model_validate_json((out / "validate" / "result.json").read_text(encoding="utf-8"))
    assert saved.verdicts == result.verdicts
    assert (out / "validate" / "summary.txt").read_text(encoding="utf-8").startswith("validate on strip: FAILED")


def test_missing_input_file_is_a_usage_error(out, tmp_path):
    result = run("poset", ExperimentConfig(input=str(tmp_path / "missing.json")))
    assert result.exit_code == 2
    assert "cannot read --input" in result.message


def test_poset_input(out, tmp_path):
    doc = save_json(tmp_path / "chain.json", PosetDoc(points=["a", "b", "c"], leq=[(0, 1), (1, 2), (0, 2)]))
    result = run("poset", ExperimentConfig(input=str(doc)))
    assert result.exit_code == 0, result.message
    assert result.verdicts["gamma-skip-covers-transitive"] is True
    assert result.verdicts["filters-principal"] is True
    gamma = json.loads((out / "poset" / "gamma.json").read_text(encoding="utf-8"))
    assert gamma["leq"] == []


def test_poset_input_must_be_an_order(out, tmp_path):
    doc = save_json(tmp_path / "open.json", PosetDoc(points=[0, 1, 2], leq=[(0, 1), (1, 2)]))
    assert run("poset", ExperimentConfig(input=str(doc))).exit_code == 2


def test_window_flag_is_checked(out):
    assert run("ladder", ExperimentConfig(space="minkowski2", window=[-1.0, 1.0])).exit_code == 2
    assert run("ladder", ExperimentConfig(space="minkowski2", window=[1.0, -1.0, -1.0, 1.0])).exit_code == 2


def test_demo_and_warp_need_their_arguments(out):
    assert run("demo", ExperimentConfig()).exit_code == 2
    assert run("demo", ExperimentConfig(demo="tachyons")).exit_code == 2
    assert run("warp", ExperimentConfig()).exit_code == 2
    assert "punctured-gap" in DEMOS


def test_cli_ladder(out, capsys):
    code = main(["ladder", "--space", "minkowski2", "--h", "0.25", "--window", "-1", "1", "-1", "1"])
    assert code in (0, 1)
    printed = capsys.readouterr().out
    assert printed.startswith("ladder: ")
    table = (out / "ladder" / "ladder.txt").read_text(encoding="utf-8")
    assert table.startswith("Causal ladder: minkowski2 (81 points")
    config = ExperimentConfig.model_validate_json((out / "ladder" / "run.json").read_text(encoding="utf-8"))
    assert config.window == [-1.0, 1.0, -1.0, 1.0]


def test_cli_list(capsys):
    assert main(["--list"]) == 0
    printed = capsys.readouterr().out
    assert "grapefruit" in printed and "warning-example" in printed


def test_cli_without_subcommand():
    assert main([]) == 2


def test_cli_rejects_unknown_subcommand():
    with pytest.raises(SystemExit) as exc:
        main(["plot"])
    assert exc.value.code == 2


def test_cli_environment_defaults(out, monkeypatch, capsys):
    monkeypatch.setenv("CAUSAL_HORIZON_WORKERS", "0")
    assert main(["validate"]) == 2
    monkeypatch.setenv("CAUSAL_HORIZON_WORKERS", "2")
    monkeypatch.setenv("CAUSAL_HORIZON_SEED", "seven")
    assert main(["validate"]) == 2
    assert "CAUSAL_HORIZON_SEED" in capsys.readouterr().err
