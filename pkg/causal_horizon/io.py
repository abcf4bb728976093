"""JSON and CSV import / export for documents, windows, traces and family specs."""
from __future__ import annotations

import ast
import csv
import logging
import math
from pathlib import Path
from typing import Any, Callable, Iterable, Sequence, TypeVar

import numpy as np
from pydantic import BaseModel

from causal_horizon.chron.oracle import SampleWindow
from causal_horizon.gallery.flat import toward_boundary
from causal_horizon.gallery.space import GallerySpace
from causal_horizon.ip.handles import IPHandle, pip
from causal_horizon.limits.families import SetSequenceFamily, TailDescriptor
from causal_horizon.schemas import FamilySpecDoc, TFAEVector

logger = logging.getLogger(__name__)

M = TypeVar("M", bound=BaseModel)

_FUNCTIONS: dict[str, Callable[..., float]] = {
    "sin": math.sin,
    "cos": math.cos,
    "sqrt": math.sqrt,
    "exp": math.exp,
    "log": math.log,
    "abs": abs,
}
_CONSTANTS = {"pi": math.pi}
_NODES = (
    ast.Expression, ast.BinOp, ast.UnaryOp, ast.Constant, ast.Name, ast.Load, ast.Call,
    ast.Add, ast.Sub, ast.Mult, ast.Div, ast.Pow, ast.Mod, ast.FloorDiv, ast.USub, ast.UAdd,
)


def load_json(path: str | Path, model: type[M]) -> M:
    return model.model_validate_json(Path(path).read_text(encoding="utf-8"))


def save_json(path: str | Path, doc: BaseModel) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(doc.model_dump_json(indent=2) + "\n", encoding="utf-8")
    logger.info("wrote %s", path)
    return path


def _cell(v: Any) -> str:
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if v is None:
        return ""
    return str(v)


def write_csv(path: str | Path, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
    """Fixed column order, shortest round-trip float text, LF line ends."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_cell(v) for v in row])
    logger.info("wrote %s", path)
    return path


def read_csv(path: str | Path) -> list[dict[str, str]]:
    with Path(path).open(newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


def window_csv(path: str | Path, window: SampleWindow) -> Path:
    header = ["id"] + [f"x{k}" for k in range(window.points.shape[1])]
    return write_csv(path, header, ([i, *p] for i, p in enumerate(window.points.tolist())))


def trace_csv(path: str | Path, label: str, ns: Sequence[int], columns: dict[str, Sequence[float]]) -> Path:
    """One row per index n with one column per traced metric."""
    names = sorted(columns)
    rows = ([label, n, *(columns[k][i] for k in names)] for i, n in enumerate(ns))
    return write_csv(path, ["family", "n", *names], rows)


def tfae_csv(path: str | Path, vectors: Sequence[TFAEVector]) -> Path:
    keys = sorted({k for v in vectors for k in v.items})
    rows = ([v.label, *(v.items.get(k) for k in keys)] for v in vectors)
    return write_csv(path, ["family", *keys], rows)


def compile_template(source: str) -> Callable[[int], float]:
    """Arithmetic expression in the index n (numbers, + - * / ** % //, pi and a few math functions)."""
    try:
        tree = ast.parse(source.strip(), mode="eval")
    except SyntaxError as exc:
        raise ValueError(f"Unknown template expression: {source!r}") from exc
    for node in ast.walk(tree):
        if not isinstance(node, _NODES):
            raise ValueError(f"Unsupported syntax {type(node).__name__} in template {source!r}")
        if isinstance(node, ast.Name) and node.id not in _FUNCTIONS and node.id not in _CONSTANTS and node.id != "n":
            raise ValueError(f"Unknown name {node.id!r} in template {source!r}")
        if isinstance(node, ast.Call) and not (isinstance(node.func, ast.Name) and node.func.id in _FUNCTIONS):
            raise ValueError(f"Unknown function in template {source!r}")
        if isinstance(node, ast.Constant) and not isinstance(node.value, (int, float)):
            raise ValueError(f"Only numeric constants are allowed in template {source!r}")
    code = compile(tree, "<template>", "eval")
    scope = {"__builtins__": {}, **_FUNCTIONS, **_CONSTANTS}

    def evaluate(n: int) -> float:
        return float(eval(code, scope, {"n": n}))

    return evaluate


def _handle(space: GallerySpace, kind: str, point: Sequence[float], label: str) -> IPHandle:
    if kind == "pip":
        return pip(point, label=label)
    if space.oracle.embed is not None:
        raise ValueError(f"tip templates need a flat chart; {space.name} has none")
    return toward_boundary(point, space.oracle.admissible, label)


def family_from_spec(doc: FamilySpecDoc, space: GallerySpace,
                     horizon: int = 64) -> tuple[SetSequenceFamily, list[IPHandle]]:
    """The family of a spec document and its candidate list (empty without a candidate)."""
    if len(doc.template) != space.oracle.dim:
        raise ValueError(f"template has {len(doc.template)} coordinates, {space.name} needs {space.oracle.dim}")
    coords = [compile_template(t) for t in doc.template]
    label = doc.label or f"{doc.kind}({', '.join(doc.template)})"

    def evaluator(n: int) -> IPHandle:
        point = [f(n) for f in coords]
        return _handle(space, doc.kind, point, f"{label}[{n}]")

    tail = None
    if doc.period is not None:
        values = [evaluator(n) for n in range(doc.start, doc.start + doc.period)]
        tail = TailDescriptor.periodic(values, start=doc.start, phase=-doc.start)
    family = SetSequenceFamily(evaluator, label, tail=tail, horizon=horizon, start=doc.start)
    candidates = []
    if doc.candidate is not None:
        candidates.append(_handle(space, doc.candidate_kind, doc.candidate, f"candidate{tuple(doc.candidate)}"))
    return family, candidates
