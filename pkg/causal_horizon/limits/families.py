"""Index-parametrized families of past sets, with optional finite-range tail descriptors."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Protocol, Sequence, Union

import numpy as np

from causal_horizon.chron.oracle import SampleWindow
from causal_horizon.errors import PreconditionError
from causal_horizon.ip.engine import realize
from causal_horizon.ip.handles import DEFAULT_DEPTH, IPHandle

logger = logging.getLogger(__name__)


class Region(Protocol):
    label: str

    def contains(self, X: np.ndarray) -> np.ndarray: ...


@dataclass(frozen=True)
class FormulaRegion:
    """A subset given by a vectorized membership test."""

    formula: Callable[[np.ndarray], np.ndarray]
    label: str = ""

    def contains(self, X: np.ndarray) -> np.ndarray:
        return np.asarray(self.formula(np.atleast_2d(np.asarray(X, dtype=float))), dtype=bool)


@dataclass(frozen=True)
class MaskRegion:
    """A window subset; points off the window take the value of the nearest window point."""

    window: SampleWindow
    mask: np.ndarray
    label: str = ""

    def contains(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        q = self.window.oracle.embed(X) if self.window.oracle.embed is not None else X
        _, idx = self.window.tree.query(q)
        return np.asarray(self.mask, dtype=bool)[idx]


Member = Union[IPHandle, FormulaRegion, MaskRegion]


@dataclass(frozen=True)
class ArithmeticMap:
    """n -> a*n + b with a >= 1, b >= 0."""

    a: int
    b: int = 0

    def __post_init__(self) -> None:
        if self.a < 1 or self.b < 0:
            raise ValueError(f"index map must be increasing: got a={self.a}, b={self.b}")

    def __call__(self, n: int) -> int:
        return self.a * n + self.b


@dataclass(frozen=True)
class TailDescriptor:
    """From `start` on the family takes values[index(n)]; the index is periodic with `period`.

    `finite` lists the (n, value) pairs before `start` that never recur.
    """

    values: tuple[Member, ...]
    index: Callable[[int], int]
    period: int
    start: int = 1
    finite: tuple[tuple[int, Member], ...] = ()

    @classmethod
    def periodic(cls, values: Sequence[Member], start: int = 1, phase: int = 0) -> TailDescriptor:
        p = len(values)
        return cls(tuple(values), lambda n: (n + phase) % p, p, start)

    @property
    def recurring(self) -> list[int]:
        """Indices of the values met infinitely often."""
        return sorted({self.index(n) for n in range(self.start, self.start + self.period)})

    def compose(self, amap: ArithmeticMap) -> TailDescriptor:
        start = 1
        while amap(start) < self.start:
            start += 1
        return TailDescriptor(self.values, lambda n: self.index(amap(n)), self.period, start)


@dataclass
class SetSequenceFamily:
    """n -> a(n) for n >= start; `horizon` is the largest index evaluated without a tail descriptor."""

    evaluator: Callable[[int], Member]
    label: str = ""
    tail: TailDescriptor | None = None
    horizon: int = 64
    start: int = 1
    _cache: dict = field(default_factory=dict, repr=False)

    def __call__(self, n: int) -> Member:
        if n < self.start:
            raise PreconditionError(f"family {self.label!r} starts at {self.start}, got index {n}")
        return self.evaluator(n)

    def realize(self, window: SampleWindow, n: int, depth: int = DEFAULT_DEPTH) -> np.ndarray:
        key = (id(window), n, depth)
        if key not in self._cache:
            self._cache[key] = realize_member(self(n), window, depth)
        return self._cache[key]

    def tail_range(self, horizon: int | None = None) -> range:
        """Indices [H/2, H] used for horizon-approximated limits."""
        H = self.horizon if horizon is None else horizon
        if H < 2:
            raise PreconditionError(f"horizon must be >= 2, got {H}")
        return range(max(self.start, H // 2), H + 1)

    def early_range(self, horizon: int | None = None) -> range:
        H = self.horizon if horizon is None else horizon
        return range(max(self.start, H // 4), max(self.start, H // 2) + 1)

    def subsequence(self, index_map: Callable[[int], int], label: str = "") -> SetSequenceFamily:
        """n -> a(index_map(n)); arithmetic maps keep the tail descriptor."""
        tail = None
        if self.tail is not None and isinstance(index_map, ArithmeticMap):
            tail = self.tail.compose(index_map)
        start = 1
        while index_map(start) < self.start:
            start += 1
        horizon = start
        while index_map(horizon + 1) <= self.horizon:
            horizon += 1
        return SetSequenceFamily(
            lambda n: self.evaluator(index_map(n)),
            label or f"{self.label}[sub]",
            tail=tail,
            horizon=max(horizon, 2),
            start=start,
        )


def realize_member(member: Member, window: SampleWindow, depth: int = DEFAULT_DEPTH) -> np.ndarray:
    if isinstance(member, IPHandle):
        return realize(member, window, depth)
    return member.contains(window.points)


def constant_family(value: Member, label: str = "", horizon: int = 64) -> SetSequenceFamily:
    return SetSequenceFamily(
        lambda n: value,
        label or f"const({getattr(value, 'label', '')})",
        tail=TailDescriptor.periodic([value]),
        horizon=horizon,
    )
