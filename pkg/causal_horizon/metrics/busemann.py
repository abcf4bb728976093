"""Busemann functions of rays on conformally flat planes, via shortest paths on an 8-neighbour grid."""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable

import networkx as nx
import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import dijkstra

from causal_horizon.chron.grid import grid_axes, mesh
from causal_horizon.schemas import BusemannReport

logger = logging.getLogger(__name__)

# (di, dj) steps; the reverse steps come from the undirected solve
_OFFSETS = ((0, 1), (1, 0), (1, 1), (1, -1))

Factor = Callable[[np.ndarray], np.ndarray]


def grapefruit_profile(y) -> np.ndarray:
    """2 on [-1, 1], 1 outside [-2, 2], a clamped cubic in between; even in y."""
    s = np.clip(np.abs(np.asarray(y, dtype=float)) - 1.0, 0.0, 1.0)
    return 2.0 - (3 * s**2 - 2 * s**3)


def grapefruit_factor(X: np.ndarray) -> np.ndarray:
    """Conformal factor of the plane metric, a function of the second coordinate only."""
    return grapefruit_profile(np.asarray(X, dtype=float)[..., 1])


class GridGraph:
    """Lattice hZ^2 on a box, edges weighted by Euclidean length times sqrt(factor(midpoint))."""

    def __init__(self, lo, hi, h: float, factor: Factor | None = None) -> None:
        self.h = float(h)
        self.axes = grid_axes(h, lo, hi)
        self.shape = tuple(len(a) for a in self.axes)
        self.coords = mesh(self.axes)
        self.lo = np.array([a[0] for a in self.axes])
        self.hi = np.array([a[-1] for a in self.axes])
        self.factor = factor
        self.matrix = self._build()
        logger.info("grid graph %s with %d nodes at h=%g", self.shape, self.n, self.h)

    @property
    def n(self) -> int:
        return len(self.coords)

    def _build(self):
        nx_, ny_ = self.shape
        index = np.arange(self.n).reshape(self.shape)
        rows, cols, weights = [], [], []
        for di, dj in _OFFSETS:
            i0, i1 = 0, nx_ - di
            j0, j1 = max(0, -dj), ny_ - max(0, dj)
            src = index[i0:i1, j0:j1].ravel()
            dst = index[i0 + di : i1 + di, j0 + dj : j1 + dj].ravel()
            length = self.h * np.hypot(di, dj)
            mid = 0.5 * (self.coords[src] + self.coords[dst])
            scale = np.ones(len(src)) if self.factor is None else np.sqrt(self.factor(mid))
            rows.append(src)
            cols.append(dst)
            weights.append(length * scale)
        return coo_matrix(
            (np.concatenate(weights), (np.concatenate(rows), np.concatenate(cols))), shape=(self.n, self.n)
        ).tocsr()

    def contains(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        slack = 0.5 * self.h
        return np.all((X >= self.lo - slack) & (X <= self.hi + slack), axis=-1)

    def nearest(self, X: np.ndarray) -> np.ndarray:
        """Node index of the lattice point nearest to each row of X (clipped to the box)."""
        X = np.asarray(X, dtype=float)
        k = np.rint((X - self.lo) / self.h).astype(int)
        k = np.clip(k, 0, np.array(self.shape) - 1)
        return np.ravel_multi_index(tuple(np.moveaxis(k, -1, 0)), self.shape)

    def distances(self, sources) -> np.ndarray:
        """Shortest-path lengths from each source node to every node, shape (len(sources), n)."""
        return np.atleast_2d(dijkstra(self.matrix, directed=False, indices=np.asarray(sources, dtype=int)))


@dataclass(frozen=True)
class Ray:
    origin: tuple[float, float]
    direction: tuple[float, float]
    label: str = ""

    def at(self, s: float) -> np.ndarray:
        v = np.asarray(self.direction, dtype=float)
        return np.asarray(self.origin, dtype=float) + s * v / np.linalg.norm(v)


@dataclass
class BusemannFunction:
    ray: Ray
    values: np.ndarray
    finite: bool
    drift: float


def busemann(ray: Ray, graph: GridGraph, t_max: float, nodes: np.ndarray | None = None,
             tol: float = 0.5) -> BusemannFunction:
    """b(x) = D(c(T), c(0)) - D(c(T), x) on `nodes`, compared with the same at T/2.

    A drift above `tol` between the two horizons marks the function as divergent (+inf).
    """
    nodes = np.arange(graph.n) if nodes is None else np.asarray(nodes, dtype=int)
    ends = [graph.nearest(ray.at(t_max)), graph.nearest(ray.at(t_max / 2))]
    start = graph.nearest(ray.at(0.0))
    D = graph.distances(ends)
    late = D[0, start] - D[0, nodes]
    early = D[1, start] - D[1, nodes]
    drift = float(np.max(np.abs(late - early))) if len(nodes) else 0.0
    if not np.isfinite(drift) or drift > tol:
        logger.warning("Busemann function of %s does not stabilize (drift %.3g)", ray.label, drift)
        return BusemannFunction(ray, np.full(len(nodes), np.inf), False, drift)
    return BusemannFunction(ray, late, True, drift)


def busemann_distance(b1: np.ndarray, b2: np.ndarray) -> float:
    """Sup distance modulo additive constants: half the oscillation of b1 - b2."""
    diff = np.asarray(b1, dtype=float) - np.asarray(b2, dtype=float)
    if not np.all(np.isfinite(diff)):
        return float("inf")
    return float(0.5 * (diff.max() - diff.min()))


def grapefruit_rays(angles=(0.0, 0.025, 0.05), height: float = 3.0) -> list[Ray]:
    """Rightward rays starting above and below the stick, tilted away from it."""
    rays = []
    for sign, side in ((1.0, "+"), (-1.0, "-")):
        for a in angles:
            rays.append(Ray((0.0, sign * height), (np.cos(a), sign * np.sin(a)), f"c{side}({a:g})"))
    return rays


def grapefruit_boundary(h: float = 1 / 8, t_max: float = 32.0, half_width: float = 4.0,
                        angles=(0.0, 0.025, 0.05), threshold: float = 1.0) -> BusemannReport:
    """Busemann boundary points of the grapefruit plane: components and cross distances."""
    rays = grapefruit_rays(angles)
    reach = 3.0 + t_max * np.sin(max(angles)) + 2.0
    graph = GridGraph((-half_width - 2.0, -reach), (t_max + 2.0, reach), h, grapefruit_factor)
    window = np.all(np.abs(graph.coords) <= half_width + 1e-9, axis=1)
    nodes = np.flatnonzero(window)
    funcs = [busemann(r, graph, t_max, nodes) for r in rays]
    labels = [r.label for r in rays]
    n = len(rays)
    dist = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            dist[i, j] = dist[j, i] = busemann_distance(funcs[i].values, funcs[j].values)

    G = nx.Graph()
    G.add_nodes_from(range(n))
    G.add_edges_from((i, j) for i in range(n) for j in range(i + 1, n) if dist[i, j] < threshold)
    components = sorted(sorted(c) for c in nx.connected_components(G))
    comp_of = {i: k for k, c in enumerate(components) for i in c}
    cross = [dist[i, j] for i in range(n) for j in range(n) if comp_of[i] != comp_of[j]]
    min_cross = float(min(cross)) if cross else 0.0

    # within a component, distance from the first ray grows with the tilt
    monotone = True
    for c in components:
        d = [dist[c[0], k] for k in c]
        if any(b < a - 2 * h for a, b in zip(d, d[1:])):
            monotone = False
    logger.info("grapefruit boundary: %d components, min cross distance %.3f", len(components), min_cross)
    return BusemannReport(
        labels=labels,
        distances=dist.tolist(),
        components=components,
        min_cross=min_cross,
        monotone=monotone,
        finite=[f.finite for f in funcs],
    )
