"""Cross-validation of analytic chronologies by dynamic programming over lattice paths."""
from __future__ import annotations

import logging

import numpy as np

from causal_horizon.chron.oracle import ChronOracle
from causal_horizon.errors import UnsupportedSpaceError
from causal_horizon.gallery.cylinder import TWO_PI
from causal_horizon.gallery.space import GallerySpace
from causal_horizon.schemas import CrosscheckReport

logger = logging.getLogger(__name__)

SUPPORTED = ("minkowski2", "strip", "closed-strip", "punctured", "slit", "cylinder")
# Spatial cells per time step; interior steps have slope at most (K-1)/K.
STEP_CELLS = 8


def _segment_ok(oracle: ChronOracle, P: np.ndarray, Q: np.ndarray) -> np.ndarray:
    """Both ends admissible, and so is the point where the segment crosses t = 0."""
    ok = np.asarray(oracle.admissible(Q), dtype=bool)
    t0, t1 = P[..., 0], Q[..., 0]
    cross = (t0 < 0) & (t1 > 0)
    if cross.any():
        s = np.where(cross, -t0 / np.where(cross, t1 - t0, 1.0), 0.0)
        X = P + s[..., None] * (Q - P)
        X[..., 0] = 0.0
        ok &= ~cross | np.asarray(oracle.admissible(X), dtype=bool)
    return ok


def lattice_reach(oracle: ChronOracle, p, q, h: float, cells: int = STEP_CELLS) -> bool:
    """Is there a broken timelike path from p to q through lattice positions x_p + k*h?

    Interior steps advance time by cells*h and space by at most (cells-1)*h; the last step is any
    strictly timelike segment. Reachable positions are tracked slice by slice.
    """
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    dt = q[0] - p[0]
    if dt <= 0:
        return False
    periodic = bool(oracle.periodic and oracle.periodic[1])
    if periodic:
        n_cells = max(int(round(TWO_PI / h)), 3)
        h = TWO_PI / n_cells
    tau = cells * h
    steps = max(int(np.ceil(dt / tau)) - 1, 0)
    last = dt - steps * tau

    reach = steps * (cells - 1) + 1
    offsets = np.arange(-reach, reach + 1)
    S = offsets == 0
    for j in range(1, steps + 1):
        t_prev, t_next = p[0] + (j - 1) * tau, p[0] + j * tau
        new = np.zeros_like(S)
        src = np.flatnonzero(S)
        for d in range(-(cells - 1), cells):
            dst = src + d
            keep = (dst >= 0) & (dst < len(offsets))
            a, b = src[keep], dst[keep]
            if not len(a):
                continue
            P = np.column_stack([np.full(len(a), t_prev), p[1] + offsets[a] * h])
            Q = np.column_stack([np.full(len(b), t_next), p[1] + offsets[b] * h])
            if periodic:
                P[:, 1] = (P[:, 1] + np.pi) % TWO_PI - np.pi
                Q[:, 1] = (Q[:, 1] + np.pi) % TWO_PI - np.pi
            new[b[_segment_ok(oracle, P, Q)]] = True
        S = new
        if not S.any():
            return False

    xs = p[1] + offsets[S] * h
    if periodic:
        gap = np.abs((q[1] - xs + np.pi) % TWO_PI - np.pi)
        return bool(np.any(gap < last))
    P = np.column_stack([np.full(len(xs), q[0] - last), xs])
    Q = np.broadcast_to(q, P.shape).copy()
    return bool(np.any((np.abs(q[1] - xs) < last) & _segment_ok(oracle, P, Q)))


def _robust_pairs(space: GallerySpace, n_pairs: int, h: float, rng: np.random.Generator,
                  max_draws: int) -> list[tuple[np.ndarray, np.ndarray, bool]]:
    oracle = space.oracle
    lo, hi = (np.asarray(v, dtype=float) for v in space.box)
    out = []
    for _ in range(max_draws):
        if len(out) >= n_pairs:
            break
        p, q = rng.uniform(lo, hi), rng.uniform(lo, hi)
        if p[0] > q[0]:
            p, q = q, p
        s = np.array([(q[0] - p[0]) / 8 + 2 * h, 0.0])
        pts = np.stack([p, q, q - s, q + s])
        if not np.all(oracle.admissible(pts)):
            continue
        verdict = oracle.is_chron(p, q)
        if oracle.is_chron(p, q - s) == verdict == oracle.is_chron(p, q + s):
            out.append((p, q, verdict))
    return out


def cross_validate(space: GallerySpace, h: float = 1 / 16, n_pairs: int = 100, seed: int = 0) -> CrosscheckReport:
    """Compare the analytic chron predicate with lattice path search on robust random pairs."""
    if space.name not in SUPPORTED:
        raise UnsupportedSpaceError(f"no lattice path search for {space.name}")
    rng = np.random.default_rng(seed)
    pairs = _robust_pairs(space, n_pairs, h, rng, max_draws=50 * n_pairs)
    bad = []
    for p, q, verdict in pairs:
        path = lattice_reach(space.oracle, p, q, h)
        if path != verdict:
            bad.append([p.tolist(), q.tolist(), verdict, path])
    if bad:
        logger.warning("%s: %d of %d robust pairs disagree with path search", space.name, len(bad), len(pairs))
    return CrosscheckReport(space=space.name, n_pairs=len(pairs), disagreements=bad)
