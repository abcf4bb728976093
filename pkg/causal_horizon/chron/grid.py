"""Lattice samplers shared by the gallery spaces and the grid-graph metrics."""
from __future__ import annotations

from typing import Callable

import numpy as np

# Grid coordinates within this many pitches of a box face still count as inside.
_GRID_SLACK = 1e-9


def grid_axes(h: float, lo, hi) -> list[np.ndarray]:
    """Multiples of h inside [lo, hi] per axis."""
    axes = []
    for a, b in zip(lo, hi):
        k0 = int(np.ceil(a / h - _GRID_SLACK))
        k1 = int(np.floor(b / h + _GRID_SLACK))
        axes.append(np.arange(k0, k1 + 1, dtype=float) * h)
    return axes


def mesh(axes: list[np.ndarray]) -> np.ndarray:
    if any(len(a) == 0 for a in axes):
        return np.empty((0, len(axes)))
    return np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, len(axes))


def grid_sampler(admissible: Callable[[np.ndarray], np.ndarray]):
    """Sampler on the lattice hZ^d, cut to the box and to the admissible region."""

    def sample(h: float, box) -> np.ndarray:
        lo, hi = box
        pts = mesh(grid_axes(h, lo, hi))
        if not len(pts):
            return pts
        return pts[np.asarray(admissible(pts), dtype=bool)]

    return sample
