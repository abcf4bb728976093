"""Ultrastatic grapefruit spacetime R x (R^2, f(y) g0): a slow stick along the x-axis.

Coordinates (t, x, y). The chronology is (t, p) << (s, q) iff d_G(p, q) < s - t, with d_G the
shortest-path length on a lattice of pitch SPATIAL_PITCH; spatial coordinates snap to lattice nodes.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from causal_horizon.chron.grid import grid_axes, mesh
from causal_horizon.chron.oracle import ChronOracle
from causal_horizon.gallery.flat import EPS
from causal_horizon.gallery.space import GallerySpace
from causal_horizon.ip.handles import IPHandle, pip, tip
from causal_horizon.metrics.busemann import GridGraph, Ray, busemann, grapefruit_factor

logger = logging.getLogger(__name__)

SPATIAL_PITCH = 0.25
# Oracle domain and the larger graph its shortest paths run on.
HALF_WIDTH = 4.0
GRAPH_HALF_WIDTH = 6.0


@lru_cache(maxsize=1)
def _table() -> tuple[GridGraph, np.ndarray, np.ndarray]:
    """All-pairs distances between lattice nodes of the oracle domain."""
    g = GridGraph((-GRAPH_HALF_WIDTH,) * 2, (GRAPH_HALF_WIDTH,) * 2, SPATIAL_PITCH, grapefruit_factor)
    inside = np.flatnonzero(np.all(np.abs(g.coords) <= HALF_WIDTH + EPS, axis=1))
    logger.info("grapefruit distance table over %d nodes", len(inside))
    D = g.distances(inside)[:, inside]
    local = np.full(g.n, -1, dtype=int)
    local[inside] = np.arange(len(inside))
    return g, local, D


def spatial_dist(P: np.ndarray, Q: np.ndarray) -> np.ndarray:
    g, local, D = _table()
    i = local[g.nearest(np.asarray(P, dtype=float)[..., 1:])]
    j = local[g.nearest(np.asarray(Q, dtype=float)[..., 1:])]
    return D[i, j]


def grapefruit_chron(P: np.ndarray, Q: np.ndarray) -> np.ndarray:
    dt = np.asarray(Q, dtype=float)[..., 0] - np.asarray(P, dtype=float)[..., 0]
    return dt - spatial_dist(P, Q) > EPS


def grapefruit_causal(P: np.ndarray, Q: np.ndarray) -> np.ndarray:
    dt = np.asarray(Q, dtype=float)[..., 0] - np.asarray(P, dtype=float)[..., 0]
    return dt - spatial_dist(P, Q) >= -EPS


def _admissible(X: np.ndarray) -> np.ndarray:
    return np.all(np.abs(np.asarray(X, dtype=float)[..., 1:]) <= HALF_WIDTH + EPS, axis=-1)


def sample(h: float, box) -> np.ndarray:
    lo, hi = box
    (times,) = grid_axes(h, lo[:1], hi[:1])
    lo_s = np.maximum(lo[1:], -HALF_WIDTH)
    hi_s = np.minimum(hi[1:], HALF_WIDTH)
    return mesh([times, *grid_axes(SPATIAL_PITCH, lo_s, hi_s)])


@dataclass
class StickSequence:
    """PIPs at (n, (n, 0)) riding the stick, and Busemann TIPs of rays above and below it.

    All membership formulas share one extended lattice so the sequence and the candidates
    are measured with the same distance.
    """

    horizon: int
    graph: GridGraph
    b_plus: np.ndarray
    b_minus: np.ndarray

    @classmethod
    def build(cls, horizon: int = 16) -> StickSequence:
        g = GridGraph((-5.0, -GRAPH_HALF_WIDTH), (horizon + 5.0, GRAPH_HALF_WIDTH), SPATIAL_PITCH, grapefruit_factor)
        b = {}
        for sign in (1.0, -1.0):
            ray = Ray((0.0, 3.0 * sign), (1.0, 0.0), "c+" if sign > 0 else "c-")
            b[sign] = busemann(ray, g, float(horizon), tol=np.inf).values
        return cls(horizon, g, b[1.0], b[-1.0])

    def _lookup(self, values: np.ndarray, X: np.ndarray) -> np.ndarray:
        return values[self.graph.nearest(np.asarray(X, dtype=float)[..., 1:])]

    def pip(self, n: int) -> IPHandle:
        apex = self.graph.nearest(np.array([float(n), 0.0]))
        dist = self.graph.distances([apex])[0]

        def formula(X: np.ndarray) -> np.ndarray:
            return np.asarray(X, dtype=float)[..., 0] < n - self._lookup(dist, X) - EPS

        return pip((float(n), float(n), 0.0), label=f"stick({n})", formula=formula)

    def busemann_tip(self, side: str, shift: float) -> IPHandle:
        values = self.b_plus if side == "+" else self.b_minus
        sign = 1.0 if side == "+" else -1.0

        def rule(n: int):
            return (n + shift, float(n), 3.0 * sign)

        def formula(X: np.ndarray) -> np.ndarray:
            return np.asarray(X, dtype=float)[..., 0] < self._lookup(values, X) + shift - EPS

        return tip(rule, f"T{side}({shift:g})", formula=formula, certificate="causal")

    def candidates(self, shifts) -> list[IPHandle]:
        return [self.busemann_tip(side, k) for side in ("+", "-") for k in shifts]


def grapefruit() -> GallerySpace:
    oracle = ChronOracle(
        name="grapefruit",
        dim=3,
        chron=grapefruit_chron,
        admissible=_admissible,
        sampler=sample,
        causal=grapefruit_causal,
    )
    return GallerySpace(
        "grapefruit",
        oracle,
        box=((0.0, -HALF_WIDTH, -HALF_WIDTH), (2.0, HALF_WIDTH, HALF_WIDTH)),
        charts={"pip": pip, "stick": lambda horizon=16: StickSequence.build(horizon)},
        description="ultrastatic R x (R^2, f(y) g0) with f = 2 on the stick |y| <= 1",
    )
