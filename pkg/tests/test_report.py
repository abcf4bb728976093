"""Run summaries."""
from __future__ import annotations

from causal_horizon.report import render_summary
from causal_horizon.schemas import ExperimentConfig, RunResult


def test_failed_run_summary():
    result = RunResult(ok=False, exit_code=1, message="stage failed", artifacts=["out/validate/relation_report.json"],
                       verdicts={"transitive": True, "connex": False, "separable": None})
    text = render_summary("validate", ExperimentConfig(), result)
    lines = text.splitlines()
    assert lines[0] == "validate on strip: FAILED (exit 1)"
    assert "stage failed" in lines
    verdicts = {line.split()[0]: line.split()[1] for line in lines if line.startswith("  ") and len(line.split()) == 2}
    assert verdicts == {"transitive": "yes", "connex": "no", "separable": "?"}
    assert "artifacts:" in lines
    assert lines[-1] == "seed 0, h=0.03125, horizon 64"


def test_passing_run_summary():
    result = RunResult(ok=True, verdicts={"n-handles": 12})
    text = render_summary("ip", ExperimentConfig(space="cylinder", seed=4), result)
    assert text.startswith("ip on cylinder: ok (exit 0)\n")
    assert "n-handles" in text and "12" in text
    assert "artifacts:" not in text
