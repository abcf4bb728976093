"""Batch driver: one pipeline per subcommand, artifacts written under the output directory."""
from __future__ import annotations

import logging
from pathlib import Path
from typing import Any, Callable

import numpy as np
from pydantic import ValidationError

from causal_horizon import env
from causal_horizon.chron.oracle import SampleWindow, explicit_oracle
from causal_horizon.chron.relations import check_pushup, chron_within_alpha, validate_chron
from causal_horizon.errors import UnsupportedSpaceError, UsageError
from causal_horizon.gallery import SPACES, make_space, warp_completion
from causal_horizon.gallery.cfc import respect_check, respect_handles
from causal_horizon.gallery.crosscheck import cross_validate
from causal_horizon.gallery.space import GallerySpace
from causal_horizon.io import family_from_spec, load_json, save_json, tfae_csv, trace_csv, window_csv, write_csv
from causal_horizon.ip.engine import build_family, check_bs_identity, endpoint_map, future_boundary
from causal_horizon.ip.handles import pip
from causal_horizon.ladder import audit, underline
from causal_horizon.limits.families import SetSequenceFamily, realize_member
from causal_horizon.limits.operators import L_minus, L_plus
from causal_horizon.limits.probes import CorpusEntry, first_order_probe, punched_ball_family, standard_corpus
from causal_horizon.metrics.busemann import grapefruit_boundary
from causal_horizon.metrics.clouds import MetricCloud, d1, d1_tail, hausdorff
from causal_horizon.metrics.convergence import (
    ALLOWANCE_PITCHES,
    io_converges,
    metric_verdict,
    tail_fit,
    tfae_battery,
    trace,
)
from causal_horizon.poset import (
    FinitePoset,
    alpha_gamma_roundtrip,
    derive_beta,
    derive_gamma,
    filters,
    is_causal_set,
    minkowski_grid_poset,
)
from causal_horizon.report import render_ladder, render_summary
from causal_horizon.schemas import ExperimentConfig, FamilySpecDoc, PosetDoc, RelationDoc, RunResult, WarpSpecDoc

logger = logging.getLogger(__name__)

SUBCOMMANDS = ("validate", "ladder", "ip", "boundary", "converge", "tfae", "warp", "poset", "demo")
DEMOS = ("io-counterexample", "warning-example", "cylinder-alternating", "grapefruit", "punctured-gap")
# filter enumeration is exponential in the width
FILTER_POINTS = 24

Outcome = tuple[bool, dict[str, Any], list[str]]


def _format_error(e: BaseException, max_length: int = 1500) -> str:
    """Unwrap grouped and chained exceptions into one line."""
    parts: list[str] = []
    seen: set[int] = set()

    def add(exc: BaseException | None) -> None:
        if exc is None or id(exc) in seen:
            return
        seen.add(id(exc))
        if hasattr(exc, "exceptions"):
            for sub in exc.exceptions:
                add(sub)
            return
        msg = str(exc).strip()
        if msg:
            parts.append(f"{type(exc).__name__}: {msg}")
        witness = getattr(exc, "witness", None)
        if witness is not None:
            parts.append(f"witness: {witness}")
        add(exc.__cause__)
        add(exc.__context__)

    add(e)
    detail = " | ".join(parts) or type(e).__name__
    if len(detail) > max_length:
        detail = detail[: max_length - 3] + "..."
    return detail


def _space(name: str, h: float | None = None) -> GallerySpace:
    try:
        return make_space(name, h)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _window(space: GallerySpace, config: ExperimentConfig) -> SampleWindow:
    if config.window is None:
        return space.window(config.h)
    dim = space.oracle.dim
    if len(config.window) != 2 * dim:
        raise UsageError(f"--window needs {2 * dim} numbers (lo hi per axis) for {space.name}, got {len(config.window)}")
    lo, hi = config.window[0::2], config.window[1::2]
    if any(a >= b for a, b in zip(lo, hi)):
        raise UsageError(f"--window needs lo < hi on every axis, got {config.window}")
    return space.window(config.h, lo, hi)


def _load(path: str | None, model, flag: str):
    if not path:
        raise UsageError(f"this subcommand needs {flag}")
    try:
        return load_json(path, model)
    except (OSError, ValidationError) as exc:
        raise UsageError(f"cannot read {flag} {path}: {exc}") from exc


def _is_relation(R: np.ndarray) -> tuple[bool, bool]:
    """(irreflexive, transitive) of a boolean matrix."""
    M = R.astype(np.float32)
    return not bool(np.diag(R).any()), not bool(((M @ M > 0.5) & ~R).any())


def _quartiles(lo: float, hi: float) -> list[float]:
    return [lo + (hi - lo) * k / 4 for k in (1, 2, 3)]


# ---------------------------------------------------------------- subcommands


def _validate(config: ExperimentConfig, out: Path) -> Outcome:
    artifacts: list[str] = []
    if config.input:
        doc = _load(config.input, RelationDoc, "--input")
        _, window = explicit_oracle(doc)
    else:
        window = _window(_space(config.space, config.h), config)
        artifacts.append(str(window_csv(out / "window.csv", window)))
    report = validate_chron(window)
    pushup = check_pushup(window)
    verdicts: dict[str, Any] = {
        "irreflexive": report.irreflexive,
        "transitive": report.transitive,
        "connex": report.connex,
        "separable": report.separable,
        "push-up": pushup.ok,
    }
    artifacts += [str(save_json(out / "relation_report.json", report)), str(save_json(out / "pushup.json", pushup))]
    if config.input:
        return report.is_chronological_set, verdicts, artifacts
    # window truncation breaks connexity and separability at the faces
    within = chron_within_alpha(window)
    verdicts["chron-within-alpha"] = not within
    ok = report.irreflexive and report.transitive and pushup.ok and not within
    return ok, verdicts, artifacts


def _ladder(config: ExperimentConfig, out: Path) -> Outcome:
    space = _space(config.space, config.h)
    window = _window(space, config)
    result = audit(space.oracle, window, workers=config.workers)
    keep = underline(space.oracle, window)
    table = out / "ladder.txt"
    table.write_text(render_ladder(result, window.meta()), encoding="utf-8")
    verdicts: dict[str, Any] = {name: rung.verdict for name, rung in result.rungs.items()}
    verdicts["underline-removed"] = int((~keep).sum())
    if result.implication_violations:
        logger.warning("%s: ladder implications violated: %s", space.name, result.implication_violations)
    return not result.implication_violations, verdicts, [str(save_json(out / "ladder.json", result)), str(table)]


def _ip(config: ExperimentConfig, out: Path) -> Outcome:
    space = _space(config.space, config.h)
    window = _window(space, config)
    axes = [_quartiles(a, b) for a, b in zip(window.lo, window.hi)]
    grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, len(axes))
    grid = grid[np.asarray(space.oracle.admissible(grid), dtype=bool)]
    handles = [pip(p) for p in grid]
    if "future" in space.charts:
        handles += [space.chart("future")(float(x)) for x in axes[1]]
    family = build_family(handles, window, config.depth, config.workers)
    report = check_bs_identity(family)
    boundary = future_boundary(family)
    artifacts = [str(save_json(out / "family.json", family.to_doc())), str(save_json(out / "bs_identity.json", report))]
    verdicts = {
        "bs-identity": report.ok,
        "n-handles": family.size,
        "future-boundary": [family.handles[i].label for i in boundary],
    }
    return report.ok, verdicts, artifacts


def _boundary(config: ExperimentConfig, out: Path) -> Outcome:
    space = _space(config.space, config.h)
    if space.name == "grapefruit":
        report = grapefruit_boundary(h=max(config.h, 1 / 8))
        ok = report.monotone and len(report.components) == 2
        verdicts = {"components": len(report.components), "min-cross": report.min_cross, "monotone": report.monotone}
        return ok, verdicts, [str(save_json(out / "busemann.json", report))]

    if space.cfc is not None:
        window = space.window(config.h)
        rows = []
        for handle, expected in respect_handles():
            end = endpoint_map(space.cfc, handle, window, config.depth)
            rows.append([handle.label or "pip", *expected, *end.point, end.second_chain_gap])
        header = ["handle", "expected_t", "expected_x", "endpoint_t", "endpoint_x", "second_chain_gap"]
        chart = write_csv(out / "boundary_chart.csv", header, rows)
        report = respect_check(config.h, config.tol)
        verdicts = {"respect": report.ok, "inverse": report.inverse_ok, "max-endpoint-error": report.max_endpoint_error}
        return report.ok, verdicts, [str(chart), str(save_json(out / "respect.json", report))]

    if "future" not in space.charts:
        raise UsageError(f"{space.name} has no boundary chart; use strip, cylinder or grapefruit, or the warp subcommand")
    window = _window(space, config)
    lo, hi = window.lo, window.hi
    xs = _quartiles(lo[1], hi[1])
    tips = [space.chart("future")(float(x)) for x in xs]
    pips = [pip((0.5 * (lo[0] + hi[0]), x)) for x in xs]
    family = build_family(tips + pips, window, config.depth, config.workers)
    found = future_boundary(family)
    ok = found == list(range(len(tips)))
    return ok, {"future-boundary": [family.handles[i].label for i in found]}, [
        str(save_json(out / "family.json", family.to_doc()))]


def _corpus(config: ExperimentConfig) -> list[tuple[GallerySpace, CorpusEntry]]:
    if config.spec:
        doc = _load(config.spec, FamilySpecDoc, "--spec")
        space = _space(doc.space, config.h)
        try:
            family, candidates = family_from_spec(doc, space, config.horizon)
        except ValueError as exc:
            raise UsageError(str(exc)) from exc
        if not candidates:
            raise UsageError("the family spec needs a candidate")
        return [(space, CorpusEntry(family, candidates, _window(space, config)))]
    space = _space(config.space, config.h)
    try:
        return [(space, e) for e in standard_corpus(space, config.h, config.horizon)]
    except UnsupportedSpaceError as exc:
        raise UsageError(f"{exc}; pass --spec for other spaces") from exc


def _converge(config: ExperimentConfig, out: Path) -> Outcome:
    ok, verdicts, artifacts = True, {}, []
    for k, (_, entry) in enumerate(_corpus(config)):
        family, window, candidates = entry.family, entry.window, entry.candidates
        plus = L_plus(family, candidates, window, config.horizon, config.depth)
        minus = L_minus(family, candidates, window, config.horizon, config.depth)
        metric = metric_verdict(family, candidates, window, "d1", config.horizon, config.tol, depth=config.depth)
        io = io_converges(family, candidates[0], window, config.horizon, config.probe_budget, config.depth)
        if entry.limit is not None and plus.candidates != [entry.limit]:
            ok = False
            logger.warning("%s: expected L+ = %s, got %s", family.label, entry.limit, plus.labels)
        if set(plus.candidates) - set(minus.candidates):
            ok = False
            logger.warning("%s: L+ = %s is not inside L- = %s", family.label, plus.labels, minus.labels)
        if "indeterminate" not in (plus.status, metric.status) and plus.candidates != metric.candidates:
            ok = False
            logger.warning("%s: L+ gives %s, d1 gives %s", family.label, plus.labels, metric.labels)
        verdicts[family.label] = {"L+": plus.labels, "L-": minus.labels, "d1": metric.labels, "io": io.converges}

        ns = list(family.tail_range(config.horizon))
        cloud = MetricCloud.from_window(window)
        target = realize_member(candidates[0], window, config.depth)
        columns = {
            "d1": trace(family, target, window, d1, cloud, ns, config.depth),
            "hausdorff": trace(family, target, window, hausdorff, cloud, ns, config.depth),
            "d1_tail": trace(family, target, window, d1_tail, cloud, ns, config.depth),
        }
        artifacts.append(str(trace_csv(out / f"trace_{k}.csv", family.label, ns, columns)))
    return ok, verdicts, artifacts


def _tfae(config: ExperimentConfig, out: Path) -> Outcome:
    vectors = []
    for space, entry in _corpus(config):
        candidate = entry.candidates[entry.limit or 0]
        vectors.append(tfae_battery(entry.family, candidate, space, entry.window, config.horizon, config.tol,
                                    seed=config.seed, depth=config.depth))
    for v in vectors:
        if not v.core_constant:
            logger.warning("TFAE items disagree for %s: %s", v.label, v.items)
    ok = all(v.core_constant for v in vectors)
    return ok, {v.label: v.items for v in vectors}, [str(tfae_csv(out / "tfae.csv", vectors))]


def _warp(config: ExperimentConfig, out: Path) -> Outcome:
    spec = _load(config.spec, WarpSpecDoc, "--spec")
    report = warp_completion(spec, workers=config.workers)
    verdicts = {"completion": report.ok, "agreement": report.agreement, "star-integrals": report.star_integrals}
    return report.ok, verdicts, [str(save_json(out / "warp.json", report))]


def _poset(config: ExperimentConfig, out: Path) -> Outcome:
    if config.input:
        doc = _load(config.input, PosetDoc, "--input")
        try:
            poset = FinitePoset.from_doc(doc)
        except ValueError as exc:
            raise UsageError(str(exc)) from exc
    else:
        poset = minkowski_grid_poset(max(config.h, 1 / 8), seed=config.seed)
    derived = {
        "beta": derive_beta(poset),
        "gamma": derive_gamma(poset),
        "gamma-skip-covers": derive_gamma(poset, skip_covers=True),
    }
    verdicts: dict[str, Any] = {}
    artifacts = []
    for name, R in derived.items():
        irreflexive, transitive = _is_relation(R)
        verdicts[f"{name}-irreflexive"] = irreflexive
        verdicts[f"{name}-transitive"] = transitive
        artifacts.append(str(save_json(out / f"{name}.json", poset.to_doc(R))))
    causal = is_causal_set(poset)
    grid = not config.input
    roundtrip = alpha_gamma_roundtrip(poset, skip_covers=grid, exclude_margin=grid)
    verdicts["causal-set"] = causal.is_chronological_set
    verdicts["alpha-gamma"] = roundtrip.relation
    artifacts += [str(save_json(out / "causal_set.json", causal)), str(save_json(out / "roundtrip.json", roundtrip))]
    if poset.n <= FILTER_POINTS:
        report = filters(poset)
        verdicts["filters-principal"] = report.all_principal
        artifacts.append(str(save_json(out / "filters.json", report)))
    ok = all(v for k, v in verdicts.items() if k.endswith(("-irreflexive", "-transitive")))
    return ok, verdicts, artifacts


# ---------------------------------------------------------------- demos


def _io_counterexample(config: ExperimentConfig, out: Path) -> Outcome:
    """Punched balls: Hausdorff convergence to the ball without inner convergence."""
    family, ball = punched_ball_family(min(config.horizon, 32))
    window = _space("minkowski2").window(min(config.h, 1 / 64), (-1.5, -1.5), (1.5, 1.5))
    ns = list(family.tail_range())
    values = trace(family, ball.contains(window.points), window, hausdorff, MetricCloud.from_window(window), ns)
    fit = tail_fit(ns, values, ALLOWANCE_PITCHES["hausdorff"] * window.pitch, config.tol)
    io = io_converges(family, ball, window, budget=max(config.probe_budget, 4 * window.n + 1))
    ok = fit.converges and io.inner is False
    path = trace_csv(out / "punched_ball.csv", family.label, ns, {"hausdorff": values})
    return ok, {"hausdorff-converges": fit.converges, "inner": io.inner, "outer": io.outer}, [str(path)]


def _warning_example(config: ExperimentConfig, out: Path) -> Outcome:
    report = first_order_probe(horizon=config.horizon)
    verdicts = {
        "x-limit": report.x_limit_ok,
        "y-limits": all(report.y_limits_ok),
        "probe-in-liminf-past": report.probe_in_liminf_past,
        "probe-excluded": report.probe_excluded,
    }
    return report.ok, verdicts, [str(save_json(out / "first_order.json", report))]


def _cylinder_alternating(config: ExperimentConfig, out: Path) -> Outcome:
    """Apexes alternating between two fibres: no L+ limit and no d1 limit."""
    window = _space("cylinder").window(max(config.h, 1 / 8), (-4.0, -np.pi), (0.5, np.pi))
    family = SetSequenceFamily(lambda n: pip((0.0, 1.0 if n % 2 else -1.0)), "alternating", horizon=config.horizon)
    candidates = [pip((0.0, 1.0), "(0,1)"), pip((0.0, -1.0), "(0,-1)"), pip((0.0, 0.0), "(0,0)")]
    plus = L_plus(family, candidates, window, config.horizon, config.depth)
    metric = metric_verdict(family, candidates, window, "d1", config.horizon, config.tol, depth=config.depth)
    ok = not plus.candidates and not metric.candidates
    return ok, {"L+": plus.labels, "d1": metric.labels}, [
        str(save_json(out / "l_plus.json", plus)), str(save_json(out / "d1.json", metric))]


def _grapefruit(config: ExperimentConfig, out: Path) -> Outcome:
    report = grapefruit_boundary()
    ok = report.monotone and len(report.components) == 2
    return ok, {"components": len(report.components), "min-cross": report.min_cross}, [
        str(save_json(out / "busemann.json", report))]


def _punctured_gap(config: ExperimentConfig, out: Path) -> Outcome:
    """The puncture: chron agrees with lattice paths, yet J+ is not closed."""
    space = _space("punctured")
    check = cross_validate(space, h=max(config.h, 1 / 16), seed=config.seed)
    result = audit(space.oracle, space.window(max(config.h, 1 / 8)), workers=config.workers)
    simple = result.rungs["causally-simple"].verdict
    ok = check.ok and simple is False
    return ok, {"crosscheck": check.ok, "causally-simple": simple}, [
        str(save_json(out / "crosscheck.json", check)), str(save_json(out / "ladder.json", result))]


_DEMOS: dict[str, Callable[[ExperimentConfig, Path], Outcome]] = {
    "io-counterexample": _io_counterexample,
    "warning-example": _warning_example,
    "cylinder-alternating": _cylinder_alternating,
    "grapefruit": _grapefruit,
    "punctured-gap": _punctured_gap,
}


def _demo(config: ExperimentConfig, out: Path) -> Outcome:
    if config.demo not in _DEMOS:
        raise UsageError(f"Unknown demo: {config.demo}. Use one of {list(DEMOS)}")
    return _DEMOS[config.demo](config, out)


_HANDLERS: dict[str, Callable[[ExperimentConfig, Path], Outcome]] = {
    "validate": _validate,
    "ladder": _ladder,
    "ip": _ip,
    "boundary": _boundary,
    "converge": _converge,
    "tfae": _tfae,
    "warp": _warp,
    "poset": _poset,
    "demo": _demo,
}


def listing() -> str:
    lines = ["spaces:", *(f"  {name}" for name in SPACES), "demos:", *(f"  {name}" for name in DEMOS)]
    return "\n".join(lines)


def run(subcommand: str, config: ExperimentConfig) -> RunResult:
    """Run one subcommand. Exit code 0 when every verdict passes, 1 on a failed verdict or stage, 2 on usage."""
    if subcommand not in _HANDLERS:
        return RunResult(ok=False, exit_code=2, message=f"Unknown subcommand: {subcommand}. Use one of {list(SUBCOMMANDS)}")
    name = f"demo-{config.demo}" if subcommand == "demo" and config.demo else subcommand
    out = Path(env.output_dir() or config.out) / name
    out.mkdir(parents=True, exist_ok=True)
    save_json(out / "run.json", config)
    logger.info("running %s into %s", name, out)
    try:
        ok, verdicts, artifacts = _HANDLERS[subcommand](config, out)
    except UsageError as exc:
        logger.error("%s: %s", name, exc)
        return RunResult(ok=False, exit_code=2, message=_format_error(exc))
    except ValueError as exc:
        detail = _format_error(exc)
        logger.exception("%s failed: %s", name, detail)
        return RunResult(ok=False, exit_code=1, message=detail)
    result = RunResult(ok=ok, exit_code=0 if ok else 1, artifacts=artifacts, verdicts=verdicts)
    summary = out / "summary.txt"
    summary.write_text(render_summary(name, config, result), encoding="utf-8")
    result.artifacts.append(str(summary))
    save_json(out / "result.json", result)
    return result
