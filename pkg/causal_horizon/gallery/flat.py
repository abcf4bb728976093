"""Flat two-dimensional spaces: Minkowski plane, the open and half-closed strip, the punctured and the slit plane.

Coordinates are (t, x). Every predicate broadcasts over arrays shaped (..., 2).
"""
from __future__ import annotations

import numpy as np

from causal_horizon.chron.grid import grid_sampler
from causal_horizon.chron.oracle import ChronOracle
from causal_horizon.gallery.space import GallerySpace
from causal_horizon.ip.handles import IPHandle, pip, tip

# Rounding slack for lattice coordinates that are not dyadic (h = 1/6 etc.).
EPS = 1e-12


def _split(P: np.ndarray, Q: np.ndarray):
    P = np.asarray(P, dtype=float)
    Q = np.asarray(Q, dtype=float)
    return P[..., 0], P[..., 1], Q[..., 0], Q[..., 1]


def minkowski_chron(P: np.ndarray, Q: np.ndarray) -> np.ndarray:
    tp, xp, tq, xq = _split(P, Q)
    return (tq - tp) - np.abs(xq - xp) > EPS


def minkowski_causal(P: np.ndarray, Q: np.ndarray) -> np.ndarray:
    tp, xp, tq, xq = _split(P, Q)
    return (tq - tp) - np.abs(xq - xp) >= -EPS


def _everywhere(X: np.ndarray) -> np.ndarray:
    return np.ones(np.asarray(X).shape[:-1], dtype=bool)


def _open_square(X: np.ndarray) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    t, x = X[..., 0], X[..., 1]
    return (t > EPS) & (t < 1 - EPS) & (x > EPS) & (x < 1 - EPS)


def _half_closed_square(X: np.ndarray) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    t, x = X[..., 0], X[..., 1]
    return (t > EPS) & (t <= 1 + EPS) & (x > EPS) & (x < 1 - EPS)


def _off_origin(X: np.ndarray) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    return (np.abs(X[..., 0]) > EPS) | (np.abs(X[..., 1]) > EPS)


def _off_slit(X: np.ndarray) -> np.ndarray:
    """Removes the spacelike ray {t = 0, x > 0}; the origin stays."""
    X = np.asarray(X, dtype=float)
    return ~((np.abs(X[..., 0]) <= EPS) & (X[..., 1] > EPS))


def punctured_causal(P: np.ndarray, Q: np.ndarray) -> np.ndarray:
    """Minkowski J+ minus null pairs whose only causal curve runs through the origin."""
    tp, xp, tq, xq = _split(P, Q)
    across = (tp < -EPS) & (tq > EPS)
    on_right = (np.abs(xp - tp) <= EPS) & (np.abs(xq - tq) <= EPS)
    on_left = (np.abs(xp + tp) <= EPS) & (np.abs(xq + tq) <= EPS)
    return minkowski_causal(P, Q) & ~(across & (on_right | on_left))


def _slit_crossing(P: np.ndarray, Q: np.ndarray):
    """Window of x where a curve from p to q may cross t = 0, and whether it must cross."""
    tp, xp, tq, xq = _split(P, Q)
    across = (tp < -EPS) & (tq > EPS)
    lo = np.maximum(xp + tp, xq - tq)
    hi = np.minimum(xp - tp, xq + tq)
    return across, lo, hi


def slit_chron(P: np.ndarray, Q: np.ndarray) -> np.ndarray:
    """Curves from t < 0 to t > 0 must pass t = 0 at some x <= 0 inside both cones."""
    across, lo, hi = _slit_crossing(P, Q)
    gate = (lo < hi - EPS) & (lo < -EPS)
    return np.where(across, gate, minkowski_chron(P, Q))


def slit_causal(P: np.ndarray, Q: np.ndarray) -> np.ndarray:
    across, lo, hi = _slit_crossing(P, Q)
    gate = (lo <= hi + EPS) & (lo <= EPS)
    return np.where(across, gate, minkowski_causal(P, Q))


def _flat_oracle(name: str, admissible, chron=minkowski_chron, causal=minkowski_causal) -> ChronOracle:
    return ChronOracle(
        name=name,
        dim=2,
        chron=chron,
        admissible=admissible,
        sampler=grid_sampler(admissible),
        causal=causal,
    )


def toward_boundary(p, admissible, label: str = "") -> IPHandle:
    """TIP of a chain approaching a boundary point p of a flat region from below."""
    p = np.asarray(p, dtype=float)
    lean = 0.0
    if not admissible(p - np.array([1e-6, 0.0])):
        lean = 0.5 if p[1] > 0.5 else -0.5
    direction = np.array([1.0, lean])

    def rule(n: int):
        # saturates before the step drops below the rounding slack
        return p - 2.0 ** (-min(n, 30) - 1) * direction

    def formula(X: np.ndarray) -> np.ndarray:
        return minkowski_chron(X, p[None, :]) & admissible(X)

    return tip(rule, label or f"tip->({p[0]:g}, {p[1]:g})", formula=formula)


def null_infinity(u: float, side: str = "right") -> IPHandle:
    """TIP of the null ray x = t - u (right) or x = -(t - u) (left) in the Minkowski plane."""
    sign = 1.0 if side == "right" else -1.0

    def rule(n: int):
        return (float(n), sign * (n - u + 1.0 / n))

    def formula(X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        return X[..., 0] - sign * X[..., 1] < u

    return tip(rule, f"null-{side}({u:g})", formula=formula)


def timelike_infinity() -> IPHandle:
    return tip(lambda n: (float(n), 0.0), "i+", formula=_everywhere)


def minkowski2() -> GallerySpace:
    oracle = _flat_oracle("minkowski2", _everywhere)
    return GallerySpace(
        "minkowski2",
        oracle,
        box=((-2.0, -2.0), (2.0, 2.0)),
        charts={"pip": pip, "null-right": null_infinity,
                "null-left": lambda u: null_infinity(u, "left"), "i+": timelike_infinity},
        description="Minkowski plane R^{1,1}",
    )


def strip() -> GallerySpace:
    oracle = _flat_oracle("strip", _open_square)
    return GallerySpace(
        "strip",
        oracle,
        box=((0.0, 0.0), (1.0, 1.0)),
        charts={
            "pip": pip,
            "future": lambda x: toward_boundary((1.0, x), _open_square),
            "boundary": lambda p: toward_boundary(p, _open_square),
        },
        description="open square (0,1)^2 of the Minkowski plane",
    )


def closed_strip() -> GallerySpace:
    oracle = _flat_oracle("closed-strip", _half_closed_square)
    return GallerySpace(
        "closed-strip",
        oracle,
        box=((0.0, 0.0), (1.0, 1.0)),
        charts={"pip": pip},
        description="(0,1] x (0,1) with its future edge attached",
    )


def punctured() -> GallerySpace:
    oracle = _flat_oracle("punctured", _off_origin, causal=punctured_causal)
    return GallerySpace(
        "punctured",
        oracle,
        box=((-2.0, -2.0), (2.0, 2.0)),
        charts={"pip": pip},
        description="Minkowski plane without the origin",
    )


def slit() -> GallerySpace:
    oracle = _flat_oracle("slit", _off_slit, chron=slit_chron, causal=slit_causal)
    return GallerySpace(
        "slit",
        oracle,
        box=((-2.0, -2.0), (2.0, 2.0)),
        charts={"pip": pip},
        description="Minkowski plane without the spacelike ray {t = 0, x > 0}",
    )
