"""The flat cylinder R x S^1 with circumference 2*pi; coordinates (t, theta), theta in [-pi, pi)."""
from __future__ import annotations

import numpy as np

from causal_horizon.chron.grid import grid_axes, mesh
from causal_horizon.chron.oracle import ChronOracle
from causal_horizon.gallery.flat import EPS
from causal_horizon.gallery.space import GallerySpace
from causal_horizon.ip.handles import IPHandle, pip, tip

TWO_PI = 2 * np.pi


def wrap(theta):
    return (np.asarray(theta, dtype=float) + np.pi) % TWO_PI - np.pi


def circle_dist(a, b) -> np.ndarray:
    d = np.abs(wrap(np.asarray(b, dtype=float) - np.asarray(a, dtype=float)))
    return np.minimum(d, TWO_PI - d)


def cylinder_chron(P: np.ndarray, Q: np.ndarray) -> np.ndarray:
    P = np.asarray(P, dtype=float)
    Q = np.asarray(Q, dtype=float)
    return (Q[..., 0] - P[..., 0]) - circle_dist(P[..., 1], Q[..., 1]) > EPS


def cylinder_causal(P: np.ndarray, Q: np.ndarray) -> np.ndarray:
    P = np.asarray(P, dtype=float)
    Q = np.asarray(Q, dtype=float)
    return (Q[..., 0] - P[..., 0]) - circle_dist(P[..., 1], Q[..., 1]) >= -EPS


def cylinder_dist(P: np.ndarray, Q: np.ndarray) -> np.ndarray:
    P = np.asarray(P, dtype=float)
    Q = np.asarray(Q, dtype=float)
    return np.hypot(Q[..., 0] - P[..., 0], circle_dist(P[..., 1], Q[..., 1]))


def embed(X: np.ndarray) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    return np.stack([X[..., 0], np.cos(X[..., 1]), np.sin(X[..., 1])], axis=-1)


def _admissible(X: np.ndarray) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    return (X[..., 1] >= -np.pi - EPS) & (X[..., 1] < np.pi - EPS)


def sample(h: float, box) -> np.ndarray:
    """Time on hZ; the circle split into round(2*pi/h) equal arcs, cut to the box."""
    lo, hi = box
    (times,) = grid_axes(h, lo[:1], hi[:1])
    n = max(int(round(TWO_PI / h)), 3)
    theta = -np.pi + np.arange(n) * (TWO_PI / n)
    theta = theta[(theta >= lo[1] - EPS) & (theta <= hi[1] + EPS)]
    return mesh([times, theta])


def future_infinity(theta0: float = 0.0) -> IPHandle:
    """The only future boundary point: a helix chain whose past is the whole cylinder."""

    def rule(n: int):
        return (float(n), float(wrap(theta0 + 0.5 * n)))

    return tip(rule, "i+", formula=lambda X: np.ones(np.asarray(X).shape[:-1], dtype=bool))


def cylinder() -> GallerySpace:
    oracle = ChronOracle(
        name="cylinder",
        dim=2,
        chron=cylinder_chron,
        admissible=_admissible,
        sampler=sample,
        dist=cylinder_dist,
        causal=cylinder_causal,
        embed=embed,
        periodic=(False, True),
    )
    return GallerySpace(
        "cylinder",
        oracle,
        box=((-2.0, -np.pi), (2.0, np.pi)),
        charts={"pip": lambda p, label="": pip((p[0], float(wrap(p[1]))), label=label), "future": future_infinity},
        description="flat cylinder R x S^1",
    )
