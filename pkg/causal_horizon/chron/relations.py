"""Relation algebra on windows: axioms of a chronology, pasts and futures, the derived causal relation."""
from __future__ import annotations

import logging

import numpy as np

from causal_horizon.chron.oracle import SampleWindow
from causal_horizon.schemas import PushupReport, RelationReport

logger = logging.getLogger(__name__)

MAX_WITNESSES = 8


def _f32(M: np.ndarray) -> np.ndarray:
    return np.asarray(M, dtype=np.float32)


def _compose(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Boolean relation product (A;B)[i,k] = exists j: A[i,j] and B[j,k]."""
    return (_f32(A) @ _f32(B)) > 0.5


def _coords(window: SampleWindow, *idx: int) -> list:
    return [window.points[i].tolist() for i in idx]


def validate_chron(window: SampleWindow, max_witnesses: int = MAX_WITNESSES) -> RelationReport:
    """Evaluate irreflexivity, transitivity, connexity and in-window separability exhaustively."""
    window.oracle.check_admissible(window.points)
    C = window.chron
    witnesses: dict[str, list] = {}

    diag = np.flatnonzero(np.diag(C))
    if diag.size:
        witnesses["irreflexive"] = [_coords(window, i) for i in diag[:max_witnesses]]

    CC = _compose(C, C)
    bad_i, bad_k = np.nonzero(CC & ~C)
    if bad_i.size:
        rows = []
        for i, k in zip(bad_i[:max_witnesses], bad_k[:max_witnesses]):
            j = int(np.argmax(C[i] & C[:, k]))
            rows.append(_coords(window, i, j, k))
        witnesses["transitive"] = rows

    isolated = np.flatnonzero(~(C.any(axis=0) | C.any(axis=1)))
    if isolated.size:
        witnesses["connex"] = [_coords(window, i) for i in isolated[:max_witnesses]]

    gap_i, gap_k = np.nonzero(C & ~CC)
    if gap_i.size:
        witnesses["separable"] = [_coords(window, i, k) for i, k in zip(gap_i[:max_witnesses], gap_k[:max_witnesses])]

    return RelationReport(
        n_points=window.n,
        irreflexive=diag.size == 0,
        transitive=bad_i.size == 0,
        connex=isolated.size == 0,
        separable=gap_i.size == 0,
        witnesses=witnesses,
    )


def chron_past(window: SampleWindow, A: np.ndarray) -> np.ndarray:
    """{x in window | exists a in A: x << a}."""
    A = np.asarray(A, dtype=bool)
    if not A.any():
        return np.zeros(window.n, dtype=bool)
    return window.columns(A).any(axis=1)


def chron_future(window: SampleWindow, A: np.ndarray) -> np.ndarray:
    A = np.asarray(A, dtype=bool)
    if not A.any():
        return np.zeros(window.n, dtype=bool)
    return window.rows(A).any(axis=0)


def joint_future(window: SampleWindow, A: np.ndarray) -> np.ndarray:
    """Window points in I^+(a) for every a in A (the whole window when A is empty)."""
    A = np.asarray(A, dtype=bool)
    if not A.any():
        return np.ones(window.n, dtype=bool)
    return window.rows(A).all(axis=0)


def alpha_causal(window: SampleWindow) -> np.ndarray:
    """x alpha y iff I+(y) is inside I+(x) and I-(x) is inside I-(y), with cones cut to the window."""
    C = window.chron
    not_c = ~C
    # viol_future[x, y] counts z with y << z but not x << z
    viol_future = _f32(not_c) @ _f32(C).T
    viol_past = _f32(C).T @ _f32(not_c)
    return (viol_future < 0.5) & (viol_past < 0.5)


def check_pushup(window: SampleWindow, leq: np.ndarray | None = None,
                 max_witnesses: int = MAX_WITNESSES) -> PushupReport:
    """Both push-up implications x <= y << z => x << z and x << y <= z => x << z."""
    C = window.chron
    L = alpha_causal(window) if leq is None else np.asarray(leq, dtype=bool)
    violations: list = []
    for left, right in ((L, C), (C, L)):
        bad_x, bad_z = np.nonzero(_compose(left, right) & ~C)
        for x, z in zip(bad_x, bad_z):
            if len(violations) >= max_witnesses:
                break
            y = int(np.argmax(left[x] & right[:, z]))
            violations.append(_coords(window, x, y, z))
    ok = not violations
    if not ok:
        logger.info("push-up violated on %s: %d witness triples", window.oracle.name, len(violations))
    return PushupReport(ok=ok, violations=violations)


def chron_within_alpha(window: SampleWindow, margin: float | None = None) -> list:
    """Pairs p << q on the eroded window that are not alpha-related (expected empty)."""
    keep = window.interior(window.margin if margin is None else margin)
    C = window.chron
    bad = C & ~alpha_causal(window)
    bad &= keep[:, None] & keep[None, :]
    i, j = np.nonzero(bad)
    return [_coords(window, a, b) for a, b in zip(i[:MAX_WITNESSES], j[:MAX_WITNESSES])]
