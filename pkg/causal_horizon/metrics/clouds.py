"""Set metrics on finite clouds: Hausdorff distance, the damped sup metric d1 and the measure metric delta_mu."""
from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.spatial import cKDTree
from scipy.spatial.distance import cdist

from causal_horizon.chron.oracle import SampleWindow
from causal_horizon.errors import DomainError

logger = logging.getLogger(__name__)

WEIGHTINGS = ("uniform", "cell", "radial", "random")
# Below this many pairs the dense distance matrix is cheaper than tree queries.
_DENSE_PAIRS = 250_000


@dataclass
class MetricCloud:
    """Points in a metric embedding, a base point x0 and strictly positive weights."""

    points: np.ndarray
    base: np.ndarray
    weights: np.ndarray | None = None
    pitch: float = 0.0

    def __post_init__(self) -> None:
        self.points = np.atleast_2d(np.asarray(self.points, dtype=float))
        self.base = np.asarray(self.base, dtype=float)
        if self.weights is not None:
            self.weights = np.asarray(self.weights, dtype=float)
            if self.weights.shape != (len(self.points),):
                raise DomainError(f"expected {len(self.points)} weights, got {self.weights.shape}")
            if not np.all(self.weights > 0):
                raise DomainError("weights must be strictly positive", witness=int(np.argmin(self.weights)))

    @property
    def n(self) -> int:
        return len(self.points)

    @cached_property
    def tree(self) -> cKDTree:
        return cKDTree(self.points)

    @cached_property
    def damping(self) -> np.ndarray:
        """exp(-|x - x0|) per cloud point."""
        return np.exp(-np.linalg.norm(self.points - self.base, axis=1))

    @cached_property
    def extent(self) -> float:
        """R = max |x - x0| over the cloud."""
        return float(np.linalg.norm(self.points - self.base, axis=1).max())

    @classmethod
    def from_window(cls, window: SampleWindow, base=None, weighting: str = "uniform",
                    seed: int = 0) -> MetricCloud:
        pts = window.embedded
        if base is None:
            b = pts.mean(axis=0)
        else:
            b = np.asarray(base, dtype=float)[None, :]
            b = (window.oracle.embed(b) if window.oracle.embed is not None else b)[0]
        cloud = cls(pts, b, pitch=window.pitch)
        return cloud.with_weights(weighting, seed, dim=window.oracle.dim)

    def with_weights(self, weighting: str, seed: int = 0, dim: int | None = None) -> MetricCloud:
        """uniform: 1/n each; cell: h^dim each; radial: exp(-|x - x0|), normalized; random: seeded, normalized."""
        n = self.n
        if weighting == "uniform":
            w = np.full(n, 1.0 / n)
        elif weighting == "cell":
            d = self.points.shape[1] if dim is None else dim
            w = np.full(n, (self.pitch or 1.0) ** d)
        elif weighting == "radial":
            w = self.damping / self.damping.sum()
        elif weighting == "random":
            rng = np.random.default_rng(seed)
            w = rng.uniform(0.5, 1.5, size=n)
            w /= w.sum()
        else:
            raise ValueError(f"Unknown weighting: {weighting}. Use one of {WEIGHTINGS}")
        return MetricCloud(self.points, self.base, w, self.pitch)

    def rebased(self, base) -> MetricCloud:
        return MetricCloud(self.points, np.asarray(base, dtype=float), self.weights, self.pitch)

    def set_distance(self, mask: np.ndarray) -> np.ndarray:
        """d(x, A) for every cloud point x."""
        mask = np.asarray(mask, dtype=bool)
        if not mask.any():
            return np.full(self.n, np.inf)
        d, _ = cKDTree(self.points[mask]).query(self.points)
        return d


def hausdorff(A: np.ndarray, B: np.ndarray, cloud: MetricCloud) -> float:
    """Two-sided sup-inf distance; inf when exactly one set is empty."""
    A = np.asarray(A, dtype=bool)
    B = np.asarray(B, dtype=bool)
    na, nb = int(A.sum()), int(B.sum())
    if na == 0 and nb == 0:
        return 0.0
    if na == 0 or nb == 0:
        return float("inf")
    P, Q = cloud.points[A], cloud.points[B]
    if na * nb <= _DENSE_PAIRS:
        D = cdist(P, Q)
        return float(max(np.max(np.min(D, axis=1)), np.max(np.min(D, axis=0))))
    d_ab, _ = cKDTree(Q).query(P)
    d_ba, _ = cKDTree(P).query(Q)
    return float(max(d_ab.max(), d_ba.max()))


def d1(A: np.ndarray, B: np.ndarray, cloud: MetricCloud) -> float:
    """sup over cloud points of |d(x, A) - d(x, B)| * exp(-|x - x0|)."""
    A = np.asarray(A, dtype=bool)
    B = np.asarray(B, dtype=bool)
    if not A.any() or not B.any():
        raise DomainError("d1 is defined on nonempty sets", witness="A" if not A.any() else "B")
    diff = np.abs(cloud.set_distance(A) - cloud.set_distance(B))
    return float(np.max(diff * cloud.damping))


def d1_tail(A: np.ndarray, B: np.ndarray, cloud: MetricCloud) -> float:
    """Bound on what points beyond the cloud extent R can add to d1.

    |d(x, A) - d(x, B)| <= d_H(A, B) at every x, so the truncated sup is off by at most d_H(A, B) * exp(-R).
    """
    return hausdorff(A, B, cloud) * float(np.exp(-cloud.extent))


def delta_mu(A: np.ndarray, B: np.ndarray, cloud: MetricCloud) -> float:
    """Weight of the symmetric difference."""
    if cloud.weights is None:
        raise DomainError("delta_mu needs a weighted cloud")
    sym = np.asarray(A, dtype=bool) ^ np.asarray(B, dtype=bool)
    return float(cloud.weights[sym].sum())


def band_weight(window: SampleWindow, A: np.ndarray, cloud: MetricCloud, width: float) -> float:
    """Weight of the points within `width` of the window boundary of A."""
    if cloud.weights is None:
        raise DomainError("band_weight needs a weighted cloud")
    band = window.dilate(A, width) & ~window.erode(A, width)
    return float(cloud.weights[band].sum())
