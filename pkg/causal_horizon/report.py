"""Plain-text ladder tables and run summaries rendered from jinja2 templates."""
from __future__ import annotations

from pathlib import Path
from typing import Any

from jinja2 import Environment, FileSystemLoader, StrictUndefined

from causal_horizon.schemas import ExperimentConfig, LadderAudit, RunResult, WindowMeta

_env = Environment(
    loader=FileSystemLoader(str(Path(__file__).parent / "templates")),
    undefined=StrictUndefined,
    keep_trailing_newline=True,
    autoescape=False,
)


def _verdict(value: Any) -> str:
    if value is None:
        return "?"
    if value is True:
        return "yes"
    if value is False:
        return "no"
    return str(value)


_env.filters["verdict"] = _verdict


def render_ladder(audit: LadderAudit, meta: WindowMeta | None = None) -> str:
    return _env.get_template("ladder.txt").render(audit=audit, meta=meta)


def render_summary(subcommand: str, config: ExperimentConfig, result: RunResult) -> str:
    return _env.get_template("summary.txt").render(subcommand=subcommand, config=config, result=result)
