"""Multiply warped products (a, b) x K_1 x ... x K_m with metric -dt^2 + sum f_i(t) g_i.

Factors are finite metric graphs. The chronology is reachability over time slices of pitch dt:
a step from slice k to k+1 may move each factor by graph distance d_i provided
sum_i f_i(t_mid) * (d_i / dt)^2 < 1.
"""
from __future__ import annotations

import logging
import math
import re
import warnings
from dataclasses import dataclass, field
from functools import cached_property

import networkx as nx
import numpy as np
from scipy.integrate import IntegrationWarning, quad

from causal_horizon.chron.oracle import ChronOracle, SampleWindow
from causal_horizon.errors import ConditionStarViolated, DomainError, SteppingError
from causal_horizon.gallery.space import GallerySpace
from causal_horizon.ip.engine import build_family, chain_limit, future_boundary
from causal_horizon.ip.handles import IPHandle, pip, tip
from causal_horizon.schemas import WarpCompletionReport, WarpFactorDoc, WarpSpecDoc

logger = logging.getLogger(__name__)

MAX_STATES = 4096
# Slice positions closer than this (in units of dt) to the lattice count as on it.
_SLICE_TOL = 1e-9
# Cut-offs b - 10^-k used for the integrability test of condition (*).
_STAR_CUTS = range(2, 9)
_STAR_TOL = 1e-3
# Boundary chains come to rest this far below b.
_REST = 1e-7

_TERM = re.compile(
    r"^(?:(?P<coef>\d+(?:\.\d*)?(?:[eE][-+]?\d+)?)\s*\*?\s*)?"
    r"(?:\(\s*b\s*-\s*t\s*\)\s*\^\s*(?P<power>[-+]?\d+(?:\.\d*)?))?$"
)


@dataclass(frozen=True)
class WarpExpr:
    """Sum of terms c * (b - t)^p; a bare number is a constant term."""

    source: str
    terms: tuple[tuple[float, float], ...]
    b: float

    @classmethod
    def parse(cls, source: str, b: float) -> WarpExpr:
        terms = []
        for raw in re.split(r"(?<!\^)\s*\+\s*", source.strip()):
            m = _TERM.match(raw.strip())
            if not raw.strip() or m is None or (m.group("coef") is None and m.group("power") is None):
                raise ValueError(f"Unknown warp term: {raw!r} in {source!r}")
            coef = float(m.group("coef")) if m.group("coef") is not None else 1.0
            power = float(m.group("power")) if m.group("power") is not None else 0.0
            terms.append((coef, power))
        return cls(source, tuple(terms), float(b))

    def __call__(self, t) -> np.ndarray:
        gap = self.b - np.asarray(t, dtype=float)
        return sum(c * gap**p for c, p in self.terms)


def star_integral(expr: WarpExpr, c: float, factor: int = 0) -> float:
    """Integral of f^(-1/2) over [c, b); raises ConditionStarViolated when it does not settle."""
    values = []
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", IntegrationWarning)
        for k in _STAR_CUTS:
            val, _ = quad(lambda t: float(expr(t)) ** -0.5, c, expr.b - 10.0**-k, limit=200)
            values.append(val)
    steps = np.abs(np.diff(values))
    if steps[-1] > _STAR_TOL or steps[-1] > steps[0]:
        raise ConditionStarViolated(
            f"condition (*) fails for factor {factor}: integral of f^(-1/2) for f = {expr.source} diverges "
            f"(partial integrals {values[-3]:.4g}, {values[-2]:.4g}, {values[-1]:.4g})",
            factor=factor,
            expression=expr.source,
        )
    return float(values[-1])


def factor_graph(doc: WarpFactorDoc) -> nx.Graph:
    """Metric graph with `length` edge attributes; vertices are 0..V-1."""
    spec = doc.graph
    G = nx.Graph()
    if "edges" in spec:
        for u, v, length in spec["edges"]:
            G.add_edge(int(u), int(v), length=float(length))
        return nx.convert_node_labels_to_integers(G, ordering="sorted")
    kind = spec.get("kind")
    n = int(spec.get("n", 0))
    length = float(spec.get("length", 1.0))
    if kind == "cycle":
        if n < 3:
            raise ValueError(f"cycle needs at least 3 vertices, got {n}")
        nx.add_cycle(G, range(n), length=length / n)
    elif kind == "segment":
        if n < 2:
            raise ValueError(f"segment needs at least 2 vertices, got {n}")
        nx.add_path(G, range(n), length=length / (n - 1))
    else:
        raise ValueError(f"Unknown factor graph kind: {kind}. Use 'cycle', 'segment' or 'edges'.")
    return G


def subdivide(G: nx.Graph, max_edge: float) -> nx.Graph:
    """Split every edge into equal pieces no longer than max_edge; original vertices keep their ids."""
    H = nx.Graph()
    H.add_nodes_from(G.nodes)
    nxt = max(G.nodes) + 1 if len(G) else 0
    for u, v, data in sorted(G.edges(data=True)):
        pieces = max(1, math.ceil(data["length"] / max_edge - 1e-9))
        chain = [u, *range(nxt, nxt + pieces - 1), v]
        nxt += pieces - 1
        nx.add_path(H, chain, length=data["length"] / pieces)
    return H


@dataclass
class WarpFactor:
    expr: WarpExpr
    graph: nx.Graph
    fine: nx.Graph
    n_vertices: int

    @cached_property
    def dist(self) -> np.ndarray:
        return np.asarray(nx.floyd_warshall_numpy(self.fine, nodelist=range(len(self.fine)), weight="length"))

    @property
    def n_states(self) -> int:
        return len(self.fine)


@dataclass
class WarpedSpace:
    """Time-sliced reachability oracle for a validated WarpSpecDoc."""

    spec: WarpSpecDoc
    factors: list[WarpFactor]
    _reach: dict[tuple[int, int], np.ndarray] = field(default_factory=dict, repr=False)

    @classmethod
    def from_spec(cls, spec: WarpSpecDoc) -> WarpedSpace:
        slices = (spec.b - spec.a) / spec.dt
        if abs(slices - round(slices)) > _SLICE_TOL * max(1.0, slices):
            raise SteppingError(f"dt={spec.dt} does not divide the interval ({spec.a}, {spec.b})")
        factors = []
        for i, doc in enumerate(spec.factors):
            expr = WarpExpr.parse(doc.warp, spec.b)
            G = factor_graph(doc)
            fine = subdivide(G, spec.dt / spec.substeps)
            factors.append(WarpFactor(expr, G, fine, len(G)))
        space = cls(spec, factors)
        if space.n_states > MAX_STATES:
            raise DomainError(f"product of factor states {space.n_states} exceeds {MAX_STATES}")
        mids = space.times[:-1] + spec.dt / 2
        for i, f in enumerate(factors):
            if not np.all(f.expr(mids) > 0):
                raise DomainError(f"warping function of factor {i} is not positive on ({spec.a}, {spec.b})")
        logger.info("warped space: %d slices, %d product states", space.n_slices, space.n_states)
        return space

    @property
    def n_slices(self) -> int:
        return int(round((self.spec.b - self.spec.a) / self.spec.dt))

    @cached_property
    def times(self) -> np.ndarray:
        """Slice times a, a + dt, ..., b."""
        return self.spec.a + np.arange(self.n_slices + 1) * self.spec.dt

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(f.n_states for f in self.factors)

    @property
    def n_states(self) -> int:
        return int(np.prod(self.shape)) if self.factors else 1

    def refined(self) -> WarpedSpace:
        """Same spec with dt halved and twice the sub-edges per step."""
        doc = self.spec.model_copy(update={"dt": self.spec.dt / 2, "substeps": self.spec.substeps * 2})
        return WarpedSpace.from_spec(doc)

    @cached_property
    def steps(self) -> list[np.ndarray]:
        """Allowed transitions between consecutive slices, one S x S matrix per slice."""
        out = []
        dt = self.spec.dt
        for k in range(self.n_slices):
            mid = self.times[k] + dt / 2
            cost = np.zeros((1, 1))
            for f in self.factors:
                term = float(f.expr(mid)) * (f.dist / dt) ** 2
                cost = (cost[:, None, :, None] + term[None, :, None, :]).reshape(
                    cost.shape[0] * term.shape[0], cost.shape[1] * term.shape[1])
            out.append((cost < 1.0).astype(np.float32))
        return out

    def slice_of(self, t) -> np.ndarray:
        k = (np.asarray(t, dtype=float) - self.spec.a) / self.spec.dt
        r = np.rint(k)
        if np.any(np.abs(k - r) > 1e-6):
            bad = np.asarray(t, dtype=float).ravel()[int(np.argmax(np.abs(k - r).ravel()))]
            raise SteppingError(f"time {bad} is not on the slice lattice a + k*dt (dt={self.spec.dt})")
        return r.astype(int)

    def state_of(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if not self.factors:
            return np.zeros(X.shape[:-1], dtype=int)
        idx = np.rint(X[..., 1:]).astype(int)
        return np.ravel_multi_index(tuple(np.moveaxis(idx, -1, 0)), self.shape)

    def _ensure_reach(self, keys: set[tuple[int, int]]) -> None:
        missing = sorted(k for k in keys if k not in self._reach)
        by_slice: dict[int, list[int]] = {}
        for k0, s in missing:
            by_slice.setdefault(k0, []).append(s)
        for k0, states in by_slice.items():
            R = np.zeros((len(states), self.n_slices + 1, self.n_states), dtype=bool)
            cur = np.zeros((len(states), self.n_states), dtype=np.float32)
            cur[np.arange(len(states)), states] = 1.0
            for k in range(k0, self.n_slices):
                cur = ((cur @ self.steps[k]) > 0.5).astype(np.float32)
                R[:, k + 1] = cur > 0.5
            for row, s in enumerate(states):
                self._reach[(k0, s)] = R[row]

    def chron(self, P: np.ndarray, Q: np.ndarray) -> np.ndarray:
        P = np.asarray(P, dtype=float)
        Q = np.asarray(Q, dtype=float)
        kp, sp = self.slice_of(P[..., 0]), self.state_of(P)
        kq, sq = self.slice_of(Q[..., 0]), self.state_of(Q)
        kp, sp, kq, sq = np.broadcast_arrays(kp, sp, kq, sq)
        codes, row = np.unique(kp * self.n_states + sp, return_inverse=True)
        keys = [(int(c) // self.n_states, int(c) % self.n_states) for c in codes]
        self._ensure_reach(set(keys))
        table = np.stack([self._reach[k] for k in keys])
        kq_safe = np.clip(kq, 0, self.n_slices)
        return (kq > kp) & table[row.reshape(kp.shape), kq_safe, sq]

    def causal(self, P: np.ndarray, Q: np.ndarray) -> np.ndarray:
        same = np.all(np.asarray(P, dtype=float) == np.asarray(Q, dtype=float), axis=-1)
        return same | self.chron(P, Q)

    def dist(self, P: np.ndarray, Q: np.ndarray) -> np.ndarray:
        P = np.asarray(P, dtype=float)
        Q = np.asarray(Q, dtype=float)
        d = np.abs(Q[..., 0] - P[..., 0])
        for i, f in enumerate(self.factors):
            d = d + f.dist[np.rint(P[..., 1 + i]).astype(int), np.rint(Q[..., 1 + i]).astype(int)]
        return d

    def admissible(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        t = X[..., 0]
        ok = (t > self.spec.a + _SLICE_TOL) & (t < self.spec.b - _SLICE_TOL)
        for i, f in enumerate(self.factors):
            ok &= (X[..., 1 + i] >= 0) & (X[..., 1 + i] <= f.n_states - 1)
        return ok

    def sample(self, h: float, box) -> np.ndarray:
        """Every product state at every interior slice within the time extent of the box."""
        lo, hi = box
        times = self.times[1:-1]
        times = times[(times >= lo[0] - _SLICE_TOL) & (times <= hi[0] + _SLICE_TOL)]
        if not self.factors:
            return times[:, None]
        states = np.stack(np.unravel_index(np.arange(self.n_states), self.shape), axis=-1).astype(float)
        return np.concatenate(
            [np.repeat(times, len(states))[:, None], np.tile(states, (len(times), 1))], axis=1)

    @cached_property
    def oracle(self) -> ChronOracle:
        return ChronOracle(
            name="warped",
            dim=1 + len(self.factors),
            chron=self.chron,
            admissible=self.admissible,
            sampler=self.sample,
            dist=self.dist,
            causal=self.causal,
        )

    def window(self) -> SampleWindow:
        lo = [self.spec.a] + [0.0] * len(self.factors)
        hi = [self.spec.b] + [float(f.n_states - 1) for f in self.factors]
        return self.oracle.window(self.spec.dt, lo, hi)

    def vertices(self) -> np.ndarray:
        """Product of the original (unsubdivided) vertex sets, as coordinate rows."""
        if not self.factors:
            return np.zeros((1, 0))
        grids = np.meshgrid(*[np.arange(f.n_vertices, dtype=float) for f in self.factors], indexing="ij")
        return np.stack([g.ravel() for g in grids], axis=-1)

    def approach(self, target) -> list[int]:
        """Start states `substeps` fine edges from `target` toward an original neighbour, per factor."""
        start = []
        for f, v in zip(self.factors, target):
            v = int(round(v))
            neighbours = sorted(f.graph.neighbors(v))
            if not neighbours:
                start.append(v)
                continue
            route = nx.shortest_path(f.fine, v, neighbours[0], weight="length")
            start.append(int(route[min(self.spec.substeps, len(route) - 1)]))
        return start

    def good_path(self, start, target) -> np.ndarray:
        """Lattice points of a good path from (a + dt, start) toward `target`, one slice per step.

        Each step moves the factors along shortest fine-graph routes while sum_i f_i(t_mid) (d_i/dt)^2 < 1,
        the same budget as the slice transitions. The walk ends on arrival or at the last interior slice.
        """
        dt = self.spec.dt
        routes = [
            nx.shortest_path(f.fine, int(round(s)), int(round(e)), weight="length")
            for f, s, e in zip(self.factors, start, target)
        ]
        pos = [0] * len(routes)
        k = 1
        rows = [[float(self.times[k]), *(float(r[0]) for r in routes)]]
        while k < self.n_slices - 1 and any(p < len(r) - 1 for p, r in zip(pos, routes)):
            mid = self.times[k] + dt / 2
            used = 0.0
            for i, (f, r) in enumerate(zip(self.factors, routes)):
                scale = float(f.expr(mid))
                here = nxt = pos[i]
                while nxt < len(r) - 1 and used + scale * (f.dist[r[here], r[nxt + 1]] / dt) ** 2 < 1.0:
                    nxt += 1
                used += scale * (f.dist[r[here], r[nxt]] / dt) ** 2
                pos[i] = nxt
            k += 1
            rows.append([float(self.times[k]), *(float(r[p]) for r, p in zip(routes, pos))])
        return np.array(rows)

    def boundary_handle(self, vertex, start=None) -> IPHandle:
        """TIP of a good path toward `vertex` followed by t -> b at rest in K.

        Times after the walk are b - (b - t_L) 2^-j until they come within _REST of b, so every chain
        point lies in (a, b). Membership snaps each chain point up to the next slice.
        """
        target = [int(round(v)) for v in vertex]
        walk = self.good_path(self.approach(target) if start is None else start, target)
        last = walk[-1]
        gap = self.spec.b - float(last[0])
        settle = max(1, math.ceil(math.log2(gap / _REST)))

        def rule(n: int):
            if n <= len(walk):
                return walk[n - 1]
            return np.array([self.spec.b - gap * 2.0 ** -min(n - len(walk), settle), *last[1:]])

        pts = np.vstack([rule(n) for n in range(1, len(walk) + settle + 1)])
        k = np.clip(np.ceil((pts[:, 0] - self.spec.a) / self.spec.dt - 1e-6), 0, self.n_slices).astype(int)
        snapped = np.unique(np.column_stack([self.times[k], pts[:, 1:]]), axis=0)

        def formula(X: np.ndarray) -> np.ndarray:
            X = np.atleast_2d(np.asarray(X, dtype=float))
            return self.chron(X[:, None, :], snapped[None, :, :]).any(axis=1)

        return tip(rule, f"b x {tuple(float(v) for v in target)}", formula=formula)

    def classify(self, limit) -> list[float]:
        """Nearest original vertex of each factor to the K-projection of a chain limit."""
        limit = np.asarray(limit, dtype=float)
        out = []
        for i, f in enumerate(self.factors):
            state = int(np.rint(limit[1 + i]))
            out.append(float(np.argmin(f.dist[state, : f.n_vertices])))
        return out

    def interior_handle(self, k: int, vertex) -> IPHandle:
        return pip((float(self.times[k]), *[float(v) for v in vertex]))

    def gallery(self) -> GallerySpace:
        lo = (self.spec.a,) + (0.0,) * len(self.factors)
        hi = (self.spec.b,) + tuple(float(f.n_states - 1) for f in self.factors)
        return GallerySpace(
            "warped",
            self.oracle,
            box=(lo, hi),
            charts={"pip": pip, "future": self.boundary_handle},
            description=f"multiply warped product over ({self.spec.a}, {self.spec.b}) with {len(self.factors)} factors",
        )


def warp_space(spec: WarpSpecDoc) -> GallerySpace:
    return WarpedSpace.from_spec(spec).gallery()


def warp_completion(spec: WarpSpecDoc, n_handles: int = 10, workers: int = 1) -> WarpCompletionReport:
    """Boundary chart {b} x K against the computed future completion on a sampled family.

    Refuses when a factor violates condition (*).
    """
    c = 0.5 * (spec.a + spec.b)
    integrals = [
        star_integral(WarpExpr.parse(doc.warp, spec.b), c, factor=i) for i, doc in enumerate(spec.factors)
    ]
    space = WarpedSpace.from_spec(spec)
    if space.n_slices < 3:
        raise DomainError(f"warped completion needs at least two interior slices, got {space.n_slices - 1}")
    verts = space.vertices()
    chart = [[spec.b, *map(float, v)] for v in verts]

    n_boundary = max(1, min(len(verts), n_handles // 2))
    picks = np.unique(np.linspace(0, len(verts) - 1, n_boundary).round().astype(int))
    boundary = [space.boundary_handle(verts[i]) for i in picks]
    slices = np.linspace(1, space.n_slices - 1, max(1, n_handles - len(boundary)) + 2)[1:-1].round().astype(int)
    interior = [
        space.interior_handle(int(k), verts[picks[j % len(picks)]]) for j, k in enumerate(slices)
    ]
    handles = boundary + interior

    limits, classified, errors = [], [], []
    for h in boundary:
        limit, _ = chain_limit(h, space.oracle, embed=None, dist=space.dist)
        point = np.array([spec.b, *space.classify(limit)])
        limits.append(limit.tolist())
        classified.append(point.tolist())
        errors.append(float(space.dist(limit, point)))

    window = space.window()
    family = build_family(handles, window, workers=workers)
    apex = [np.array(p) for p in classified] + [h.generator.array for h in interior]
    expected = np.zeros((len(handles), len(handles)), dtype=bool)
    for i, p in enumerate(apex):
        for j, q in enumerate(apex):
            # boundary points have no chronological future
            expected[i, j] = i >= len(boundary) and bool(space.chron(p, q))
    agreement = float(np.mean(expected == family.bs))
    found = future_boundary(family)
    ok = (
        agreement == 1.0
        and all(e <= 2 * spec.dt for e in errors)
        and len({tuple(p) for p in classified}) == len(classified)
        and sorted(found) == list(range(len(boundary)))
    )
    if not ok:
        logger.warning("warped completion check failed: agreement %.3f, boundary %s", agreement, found)
    return WarpCompletionReport(
        ok=ok,
        star_integrals=integrals,
        chart=chart,
        limits=limits,
        classified=classified,
        endpoint_errors=errors,
        agreement=agreement,
        n_handles=len(handles),
    )
