"""Generators of indecomposable past sets: a point (PIP) or a chain rule (TIP)."""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable, Literal, Sequence

import numpy as np

from causal_horizon.chron.oracle import ChronOracle, SampleWindow
from causal_horizon.errors import CertificateError, PreconditionError
from causal_horizon.schemas import HandleDescriptor

logger = logging.getLogger(__name__)

DEFAULT_DEPTH = 64
MAX_DEPTH = 1024


@dataclass(frozen=True)
class Point:
    p: tuple[float, ...]

    @property
    def array(self) -> np.ndarray:
        return np.asarray(self.p, dtype=float)


@dataclass(frozen=True)
class Chain:
    """A chain n -> c(n) for n >= 1; `certificate` is the monotonicity it promises."""

    rule: Callable[[int], Sequence[float]]
    certificate: Literal["chronological", "causal"] = "chronological"

    def chain_points(self, N: int) -> np.ndarray:
        """c(1..N), cut at the first point that repeats its predecessor numerically."""
        if N < 1:
            raise PreconditionError(f"chain depth must be >= 1, got {N}")
        pts = [np.asarray(self.rule(1), dtype=float)]
        for n in range(2, N + 1):
            q = np.asarray(self.rule(n), dtype=float)
            if np.array_equal(q, pts[-1]):
                break
            pts.append(q)
        return np.vstack(pts)

    def check(self, oracle: ChronOracle, pts: np.ndarray) -> None:
        if len(pts) < 2:
            return
        if self.certificate == "chronological":
            ok = oracle.chron(pts[:-1], pts[1:])
        else:
            ok = oracle.causal_relation(pts[:-1], pts[1:]) & np.any(pts[:-1] != pts[1:], axis=-1)
        ok = np.asarray(ok, dtype=bool)
        if not ok.all():
            n = int(np.argmin(ok)) + 1
            raise CertificateError(
                f"{self.certificate} chain broken between c({n}) and c({n + 1}): "
                f"{pts[n - 1].tolist()} -> {pts[n].tolist()}",
                witness=n,
            )


@dataclass(frozen=True)
class IPHandle:
    """An indecomposable past set given by its generator; `formula` is an optional analytic membership test."""

    generator: Point | Chain
    label: str = ""
    formula: Callable[[np.ndarray], np.ndarray] | None = None

    @property
    def is_proper(self) -> bool:
        return isinstance(self.generator, Point)

    def member(self, oracle: ChronOracle, X: np.ndarray, N: int = DEFAULT_DEPTH) -> np.ndarray:
        """x in I^-(generator); for chains, exists n <= N with x << c(n). Monotone in N."""
        if N < 1:
            raise PreconditionError(f"evaluation depth must be >= 1, got {N}")
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if self.formula is not None:
            return np.asarray(self.formula(X), dtype=bool)
        if isinstance(self.generator, Point):
            return np.asarray(oracle.chron(X, self.generator.array[None, :]), dtype=bool)
        pts = self.admissible_points(oracle, N)
        return oracle.chron_matrix(X, pts).any(axis=1)

    def admissible_points(self, oracle: ChronOracle, N: int = DEFAULT_DEPTH) -> np.ndarray:
        """Checked chain points, cut before the first one that rounds onto an inadmissible limit."""
        pts = self.generator.chain_points(N)
        ok = np.asarray(oracle.admissible(pts), dtype=bool)
        if not ok[0]:
            raise CertificateError(f"chain {self.label!r} starts outside the space: {pts[0].tolist()}", witness=1)
        if not ok.all():
            pts = pts[: int(np.argmin(ok))]
        self.generator.check(oracle, pts)
        return pts

    def realize(self, window: SampleWindow, N: int = DEFAULT_DEPTH) -> np.ndarray:
        return self.member(window.oracle, window.points, N)

    def contains(self, X: np.ndarray, oracle: ChronOracle) -> np.ndarray:
        return self.member(oracle, X)

    def descriptor(self, head: int = 4) -> HandleDescriptor:
        if isinstance(self.generator, Point):
            return HandleDescriptor(kind="point", label=self.label, apex=[float(v) for v in self.generator.p])
        pts = self.generator.chain_points(head)
        return HandleDescriptor(
            kind="chain",
            label=self.label,
            chain_head=[[float(v) for v in row] for row in pts],
            certificate=self.generator.certificate,
        )


def pip(p: Sequence[float], label: str = "", formula=None) -> IPHandle:
    return IPHandle(Point(tuple(float(v) for v in p)), label=label or f"I-({', '.join(f'{v:g}' for v in p)})", formula=formula)


def tip(rule: Callable[[int], Sequence[float]], label: str, formula=None,
        certificate: Literal["chronological", "causal"] = "chronological") -> IPHandle:
    return IPHandle(Chain(rule, certificate), label=label, formula=formula)


def chain_from_points(points: np.ndarray, label: str = "") -> IPHandle:
    """A finite chain handle through the given points (the last point repeats)."""
    pts = np.asarray(points, dtype=float)
    last = len(pts) - 1
    return IPHandle(Chain(lambda n: pts[min(n - 1, last)]), label=label)
