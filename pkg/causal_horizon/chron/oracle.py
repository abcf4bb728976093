"""Chronological structures given intensionally, and finite sample windows that evaluate them."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable

import numpy as np
from scipy.spatial import cKDTree

from causal_horizon.errors import DomainError
from causal_horizon.schemas import RelationDoc, WindowMeta

logger = logging.getLogger(__name__)

# Dense chron matrices are cached only up to this many window points.
MATRIX_LIMIT = 4096
_BLOCK = 256
# Distances within this relative slack count as "within" a radius (grid ties).
_RADIUS_SLACK = 1e-9

Relation = Callable[[np.ndarray, np.ndarray], np.ndarray]
Box = tuple[np.ndarray, np.ndarray]


def _default_dist(p: np.ndarray, q: np.ndarray) -> np.ndarray:
    return np.linalg.norm(np.asarray(p, dtype=float) - np.asarray(q, dtype=float), axis=-1)


@dataclass(frozen=True)
class ChronOracle:
    """A chronology p << q over points of R^dim, evaluated by broadcasting over arrays shaped (..., dim)."""

    name: str
    dim: int
    chron: Relation
    admissible: Callable[[np.ndarray], np.ndarray]
    sampler: Callable[[float, Box], np.ndarray]
    dist: Callable[[np.ndarray, np.ndarray], np.ndarray] = _default_dist
    causal: Relation | None = None
    embed: Callable[[np.ndarray], np.ndarray] | None = None
    periodic: tuple[bool, ...] = ()

    def is_chron(self, p, q) -> bool:
        return bool(self.chron(np.asarray(p, dtype=float), np.asarray(q, dtype=float)))

    def is_causal(self, p, q) -> bool:
        p = np.asarray(p, dtype=float)
        q = np.asarray(q, dtype=float)
        return bool(self.causal_relation(p, q))

    def causal_relation(self, P: np.ndarray, Q: np.ndarray) -> np.ndarray:
        """Analytic causal relation when the space has one, else p == q or p << q."""
        if self.causal is not None:
            return self.causal(P, Q)
        same = np.all(np.asarray(P) == np.asarray(Q), axis=-1)
        return same | self.chron(P, Q)

    def check_admissible(self, X: np.ndarray) -> None:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        ok = np.asarray(self.admissible(X), dtype=bool)
        if not ok.all():
            bad = X[int(np.argmin(ok))]
            raise DomainError(
                f"point {bad.tolist()} is outside the admissible region of {self.name}",
                witness=bad.tolist(),
            )

    def chron_matrix(self, P: np.ndarray, Q: np.ndarray) -> np.ndarray:
        return _block_relation(self.chron, P, Q)

    def causal_matrix(self, P: np.ndarray, Q: np.ndarray) -> np.ndarray:
        return _block_relation(self.causal_relation, P, Q)

    def window(self, h: float, lo, hi) -> SampleWindow:
        lo = np.asarray(lo, dtype=float)
        hi = np.asarray(hi, dtype=float)
        points = np.asarray(self.sampler(h, (lo, hi)), dtype=float)
        if points.size == 0:
            raise DomainError(f"empty window for {self.name} at h={h}")
        return SampleWindow(self, points, h, lo, hi)


def _block_relation(rel: Relation, P: np.ndarray, Q: np.ndarray) -> np.ndarray:
    P = np.asarray(P, dtype=float)
    Q = np.asarray(Q, dtype=float)
    out = np.empty((len(P), len(Q)), dtype=bool)
    for i in range(0, len(P), _BLOCK):
        out[i : i + _BLOCK] = rel(P[i : i + _BLOCK, None, :], Q[None, :, :])
    return out


@dataclass(eq=False)
class SampleWindow:
    """A finite point cloud of an oracle; all set comparisons and metrics are evaluated here.

    Sets on a window are boolean masks over `points`. `pitch` is the grid spacing h; a pitch of 0
    marks an explicit finite relation, where erosion is the identity and comparisons are exact.
    """

    oracle: ChronOracle
    points: np.ndarray
    pitch: float
    lo: np.ndarray | None = None
    hi: np.ndarray | None = None
    _matrix: np.ndarray | None = field(default=None, repr=False)

    @property
    def n(self) -> int:
        return len(self.points)

    @property
    def exact(self) -> bool:
        return self.pitch == 0

    @property
    def margin(self) -> float:
        return 2 * self.pitch

    @cached_property
    def embedded(self) -> np.ndarray:
        if self.oracle.embed is not None:
            return np.asarray(self.oracle.embed(self.points), dtype=float)
        return self.points

    @cached_property
    def tree(self) -> cKDTree:
        return cKDTree(self.embedded)

    @property
    def chron(self) -> np.ndarray:
        """Dense chron matrix C[i, j] = points[i] << points[j]."""
        if self._matrix is None:
            if self.n > MATRIX_LIMIT:
                logger.warning("window of %d points exceeds the dense matrix limit; not caching", self.n)
                return self.oracle.chron_matrix(self.points, self.points)
            logger.info("computing %dx%d chron matrix for %s", self.n, self.n, self.oracle.name)
            self._matrix = self.oracle.chron_matrix(self.points, self.points)
        return self._matrix

    @cached_property
    def causal(self) -> np.ndarray:
        """Dense analytic causal matrix (the oracle's fast path, not alpha)."""
        return self.oracle.causal_matrix(self.points, self.points)

    def columns(self, mask: np.ndarray) -> np.ndarray:
        """C[:, mask]; re-evaluates the predicate above the matrix limit."""
        if self._matrix is not None or self.n <= MATRIX_LIMIT:
            return self.chron[:, mask]
        return self.oracle.chron_matrix(self.points, self.points[mask])

    def rows(self, mask: np.ndarray) -> np.ndarray:
        if self._matrix is not None or self.n <= MATRIX_LIMIT:
            return self.chron[mask]
        return self.oracle.chron_matrix(self.points[mask], self.points)

    def mask_of(self, formula: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
        return np.asarray(formula(self.points), dtype=bool)

    def index_of(self, p) -> int:
        """Index of the window point nearest to p."""
        p = np.asarray(p, dtype=float)[None, :]
        q = self.oracle.embed(p) if self.oracle.embed is not None else p
        _, i = self.tree.query(q[0])
        return int(i)

    def interior(self, margin: float) -> np.ndarray:
        """Points at least `margin` away from every non-periodic face of the window box."""
        mask = np.ones(self.n, dtype=bool)
        if self.exact or margin <= 0 or self.lo is None or self.hi is None:
            return mask
        periodic = self.oracle.periodic or (False,) * self.oracle.dim
        for axis in range(self.oracle.dim):
            if periodic[axis]:
                continue
            lo, hi = self.lo[axis], self.hi[axis]
            if np.isfinite(lo):
                mask &= self.points[:, axis] >= lo + margin * (1 - _RADIUS_SLACK)
            if np.isfinite(hi):
                mask &= self.points[:, axis] <= hi - margin * (1 - _RADIUS_SLACK)
        return mask

    def erode(self, mask: np.ndarray, m: float | None = None) -> np.ndarray:
        """Points of interior(m) whose whole m-ball of window neighbours lies in mask."""
        m = self.margin if m is None else m
        mask = np.asarray(mask, dtype=bool)
        if self.exact or m <= 0:
            return mask.copy()
        out = mask & self.interior(m)
        if out.any() and not mask.all():
            bad = cKDTree(self.embedded[~mask])
            d, _ = bad.query(self.embedded[out], distance_upper_bound=m * (1 + _RADIUS_SLACK))
            keep = np.isinf(d)
            idx = np.flatnonzero(out)
            out[idx[~keep]] = False
        return out

    def dilate(self, mask: np.ndarray, m: float | None = None) -> np.ndarray:
        """Points within m of mask."""
        m = self.margin if m is None else m
        mask = np.asarray(mask, dtype=bool)
        if self.exact or m <= 0 or not mask.any():
            return mask.copy()
        d, _ = cKDTree(self.embedded[mask]).query(self.embedded, distance_upper_bound=m * (1 + _RADIUS_SLACK))
        return np.isfinite(d)

    def subset_witness(self, A: np.ndarray, B: np.ndarray, margin: float | None = None) -> int | None:
        """Index of a point of erode(A) outside B, or None when A is inside B up to the margin."""
        diff = self.erode(A, margin) & ~np.asarray(B, dtype=bool)
        if diff.any():
            return int(np.flatnonzero(diff)[0])
        return None

    def subset(self, A: np.ndarray, B: np.ndarray, margin: float | None = None) -> bool:
        return self.subset_witness(A, B, margin) is None

    def same(self, A: np.ndarray, B: np.ndarray, margin: float | None = None) -> bool:
        return self.subset(A, B, margin) and self.subset(B, A, margin)

    def meta(self) -> WindowMeta:
        lo = [] if self.lo is None else [float(v) for v in self.lo]
        hi = [] if self.hi is None else [float(v) for v in self.hi]
        return WindowMeta(space=self.oracle.name, pitch=self.pitch, lo=lo, hi=hi, n_points=self.n)

    def restrict(self, mask: np.ndarray) -> SampleWindow:
        """Sub-window on the masked points (same oracle, pitch and box)."""
        return SampleWindow(self.oracle, self.points[np.asarray(mask, dtype=bool)], self.pitch, self.lo, self.hi)


def explicit_oracle(doc: RelationDoc, name: str = "explicit") -> tuple[ChronOracle, SampleWindow]:
    """Oracle and exact window for a finite relation; points are their integer ids."""
    n = len(doc.points)
    table = np.zeros((n, n), dtype=bool)
    for i, j in doc.chron:
        table[i, j] = True

    def chron(P: np.ndarray, Q: np.ndarray) -> np.ndarray:
        i = np.asarray(P, dtype=float)[..., 0].astype(int)
        j = np.asarray(Q, dtype=float)[..., 0].astype(int)
        return table[i, j]

    def admissible(X: np.ndarray) -> np.ndarray:
        x = np.asarray(X, dtype=float)[..., 0]
        return (x == np.round(x)) & (x >= 0) & (x < n)

    def dist(P: np.ndarray, Q: np.ndarray) -> np.ndarray:
        return np.any(np.asarray(P) != np.asarray(Q), axis=-1).astype(float)

    ids = np.arange(n, dtype=float)[:, None]
    oracle = ChronOracle(
        name=name,
        dim=1,
        chron=chron,
        admissible=admissible,
        sampler=lambda h, box: ids,
        dist=dist,
    )
    return oracle, SampleWindow(oracle, ids, 0.0)
