"""Causal-ladder rungs evaluated on sample windows, exactly on explicit relations."""
from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable

import numpy as np

from causal_horizon.chron.grid import grid_axes, mesh
from causal_horizon.chron.oracle import ChronOracle, SampleWindow
from causal_horizon.chron.relations import MAX_WITNESSES, alpha_causal
from causal_horizon.ip.engine import is_indecomposable
from causal_horizon.schemas import LadderAudit, RungVerdict

logger = logging.getLogger(__name__)

RUNGS = (
    "past-full",
    "full",
    "preregular",
    "chronologically-dense",
    "I-distinguishing",
    "J-distinguishing",
    "past-reflecting",
    "future-reflecting",
    "inner-continuous",
    "outer-continuous",
    "causally-continuous",
    "J-closed",
    "causally-simple",
    "almost-strongly-causal",
    "strongly-causal",
    "Alexandrov",
    "globally-hyperbolic",
)
IMPLICATIONS = (("causally-simple", "causally-continuous"), ("causally-continuous", "strongly-causal"))

# Lengths below are in pitches.
RADII = (1.0, 2.0, 4.0)
CONTINUITY_MARGIN = 4.0
DIAMOND_REACH = 4.0
DIAMOND_BALL = 6.0
NEIGHBOUR = 1.5
SEPARATION = 4.0
CLOSURE_STEPS = tuple(8.0 ** -k for k in range(1, 6))
N_DIRECTIONS = 16
PREREGULAR_SAMPLE = 16

DEGENERATE = "degenerate in the discrete topology"
_SLACK = 1e-9


def _f32(M: np.ndarray) -> np.ndarray:
    return np.asarray(M, dtype=np.float32)


@dataclass
class _Probe:
    window: SampleWindow
    C: np.ndarray
    K: np.ndarray
    core: np.ndarray
    central: np.ndarray

    @property
    def h(self) -> float:
        return self.window.pitch

    @property
    def mode(self) -> str:
        return "exact" if self.window.exact else "window-approximate"

    def pt(self, i: int) -> list[float]:
        return self.window.points[int(i)].tolist()

    def verdict(self, witnesses: list, note: str = "") -> RungVerdict:
        return RungVerdict(verdict=not witnesses, mode=self.mode, witnesses=witnesses[:MAX_WITNESSES], note=note)

    def undecided(self, note: str) -> RungVerdict:
        return RungVerdict(verdict=None, mode=self.mode, note=note)

    def ball(self, i: int, r: float) -> np.ndarray:
        idx = self.window.tree.query_ball_point(self.window.embedded[i], r * self.h * (1 + _SLACK))
        return np.asarray(idx, dtype=int)


def _central(window: SampleWindow) -> np.ndarray:
    """Points at least a quarter of the box extent away from every non-periodic face."""
    mask = np.ones(window.n, dtype=bool)
    if window.exact or window.lo is None or window.hi is None:
        return mask
    periodic = window.oracle.periodic or (False,) * window.oracle.dim
    for axis in range(window.oracle.dim):
        lo, hi = window.lo[axis], window.hi[axis]
        if periodic[axis] or not (np.isfinite(lo) and np.isfinite(hi)):
            continue
        q = (hi - lo) / 4
        x = window.points[:, axis]
        mask &= (x >= lo + q - _SLACK) & (x <= hi - q + _SLACK)
    return mask


# ---------------------------------------------------------------- fullness and density


def _past_full(p: _Probe) -> RungVerdict:
    empty = np.flatnonzero(p.core & ~p.C.any(axis=0))
    return p.verdict([p.pt(i) for i in empty])


def _full(p: _Probe) -> RungVerdict:
    empty = np.flatnonzero(p.core & ~(p.C.any(axis=0) & p.C.any(axis=1)))
    return p.verdict([p.pt(i) for i in empty])


def _preregular(p: _Probe) -> RungVerdict:
    idx = np.flatnonzero(p.central & p.C.any(axis=0))
    if len(idx) > PREREGULAR_SAMPLE:
        idx = idx[np.linspace(0, len(idx) - 1, PREREGULAR_SAMPLE).astype(int)]
    bad = [p.pt(i) for i in idx if not is_indecomposable(p.C[:, i], p.window).indecomposable]
    note = "" if p.window.exact else "openness not tested; pasts of sampled points checked for indecomposability"
    return p.verdict(bad, note)


def _dense(p: _Probe) -> RungVerdict:
    if p.window.exact:
        return p.undecided(DEGENERATE)
    w = p.window
    bad = []
    for i in np.flatnonzero(p.core):
        for cone in (p.C[:, i], p.C[i]):
            if cone.any():
                d = np.linalg.norm(w.embedded[cone] - w.embedded[i], axis=1).min()
                if d > 2 * p.h * (1 + _SLACK):
                    bad.append(p.pt(i))
                    break
    # pairs whose relation survives moving the later point by the margin need a point in between
    between = (_f32(p.C) @ _f32(p.C)) > 0.5
    for i in np.flatnonzero(p.core):
        far = np.linalg.norm(w.embedded - w.embedded[i], axis=1) >= SEPARATION * p.h
        robust = w.erode(p.C[i]) & p.core & far & ~between[i]
        if robust.any():
            bad.append([p.pt(i), p.pt(np.argmax(robust))])
        if len(bad) >= MAX_WITNESSES:
            break
    return p.verdict(bad)


# ---------------------------------------------------------------- distinguishing and reflecting


def _duplicates(p: _Probe, cones: np.ndarray, keep: np.ndarray) -> list:
    idx = np.flatnonzero(keep)
    if len(idx) < 2:
        return []
    packed = np.packbits(cones[:, idx].T, axis=1)
    _, first, inverse = np.unique(packed, axis=0, return_index=True, return_inverse=True)
    out = []
    for k, g in enumerate(inverse.ravel()):
        if first[g] != k:
            out.append([p.pt(idx[first[g]]), p.pt(idx[k])])
    return out


def _distinguishing(p: _Probe, M: np.ndarray) -> RungVerdict:
    past = _duplicates(p, M, p.core & M.any(axis=0))
    future = _duplicates(p, M.T, p.core & M.any(axis=1))
    return p.verdict([["past", *w] for w in past] + [["future", *w] for w in future])


def _eroded_cones(p: _Probe, idx: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    futures = np.stack([p.window.erode(p.C[i]) for i in idx]) if len(idx) else np.zeros((0, p.window.n), bool)
    pasts = np.stack([p.window.erode(p.C[:, i]) for i in idx]) if len(idx) else np.zeros((0, p.window.n), bool)
    return futures, pasts


def _inclusions(p: _Probe) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Over central points: F[q, p] = I+(q) inside I+(p), P[p, q] = I-(p) inside I-(q), both tolerant."""
    idx = np.flatnonzero(p.central)
    EF, EP = _eroded_cones(p, idx)
    F = (_f32(EF) @ _f32(~p.C[idx]).T) < 0.5
    P = (_f32(EP) @ _f32(~p.C[:, idx])) < 0.5
    return idx, F, P


def _past_reflecting(p: _Probe) -> RungVerdict:
    idx, F, P = _inclusions(p)
    bad = np.argwhere(F & ~P.T)
    return p.verdict([[p.pt(idx[a]), p.pt(idx[b])] for b, a in bad[:MAX_WITNESSES]],
                     note="pairs (p, q) with I+(q) inside I+(p) but I-(p) not inside I-(q)")


def _future_reflecting(p: _Probe) -> RungVerdict:
    idx, F, P = _inclusions(p)
    bad = np.argwhere(P & ~F.T)
    return p.verdict([[p.pt(idx[a]), p.pt(idx[b])] for a, b in bad[:MAX_WITNESSES]],
                     note="pairs (p, q) with I-(p) inside I-(q) but I+(q) not inside I+(p)")


# ---------------------------------------------------------------- continuity of I+ and I-


def _continuity(p: _Probe, outer: bool) -> RungVerdict:
    """For each central x and test set K (eroded cone complement or cone), some ball around x
    keeps every neighbour's cone off K (outer) or over K (inner)."""
    if p.window.exact:
        return p.undecided(DEGENERATE)
    w = p.window
    m = CONTINUITY_MARGIN * p.h
    bad = []
    for i in np.flatnonzero(p.central):
        for side, cones in (("future", p.C), ("past", p.C.T)):
            test = w.erode(~cones[i], m) if outer else w.erode(cones[i], m)
            if not test.any():
                continue
            ok = False
            for r in RADII:
                nb = p.ball(i, r)
                if outer:
                    hit = (cones[nb] & test).any(axis=1)
                else:
                    hit = (test & ~cones[nb]).any(axis=1)
                if not hit.any():
                    ok = True
                    break
            if not ok:
                bad.append([side, p.pt(i), p.pt(nb[int(np.argmax(hit))])])
        if len(bad) >= MAX_WITNESSES:
            break
    return p.verdict(bad)


# ---------------------------------------------------------------- simplicity


def _directions() -> np.ndarray:
    a = np.linspace(0, 2 * np.pi, N_DIRECTIONS, endpoint=False)
    return np.column_stack([np.cos(a), np.sin(a)])


def _j_closed(p: _Probe) -> RungVerdict:
    """Pairs outside J+ that are limits of causal pairs at every sampled perturbation size."""
    if p.window.exact:
        return p.undecided(DEGENERATE)
    w = p.window
    oracle = w.oracle
    if oracle.dim != 2:
        return p.undecided("perturbation directions only defined in two dimensions")
    idx = np.flatnonzero(p.central)
    pairs = np.argwhere(~p.K[np.ix_(idx, idx)])
    pairs = pairs[w.points[idx[pairs[:, 1]], 0] > w.points[idx[pairs[:, 0]], 0]]
    if not len(pairs):
        return p.verdict([])
    X = w.points[idx[pairs[:, 0]]]
    Y = w.points[idx[pairs[:, 1]]]
    dirs = _directions()
    limit = np.ones(len(pairs), dtype=bool)
    for step in CLOSURE_STEPS:
        hit = np.zeros(len(pairs), dtype=bool)
        for d in dirs:
            shift = step * p.h * d
            Ys, Xs = Y + shift, X + shift
            okY = np.asarray(oracle.admissible(Ys), dtype=bool)
            okX = np.asarray(oracle.admissible(Xs), dtype=bool)
            hit |= okY & np.asarray(oracle.causal_relation(X, Ys), dtype=bool)
            hit |= okX & np.asarray(oracle.causal_relation(Xs, Y), dtype=bool)
        limit &= hit
        if not limit.any():
            break
    bad = np.flatnonzero(limit)
    return p.verdict([[X[k].tolist(), Y[k].tolist()] for k in bad[:MAX_WITNESSES]])


def _alpha_agrees(p: _Probe) -> list:
    keep = p.central
    A = alpha_causal(p.window)
    diff = (A != p.K) & keep[:, None] & keep[None, :]
    return [[p.pt(i), p.pt(j), bool(p.K[i, j])] for i, j in np.argwhere(diff)[:MAX_WITNESSES]]


# ---------------------------------------------------------------- diamonds


def _full_balls(p: _Probe) -> np.ndarray:
    w = p.window
    counts = np.asarray(w.tree.query_ball_point(w.embedded, DIAMOND_REACH * p.h * (1 + _SLACK),
                                                return_length=True))
    return counts == counts.max()


def _diamonds(p: _Probe, alexandrov: bool) -> RungVerdict:
    """Each tested x has p << x << q nearby whose diamond stays in a small ball around x;
    Alexandrov additionally asks the diamond to hold x's locally connected neighbours."""
    if p.window.exact:
        return p.undecided(DEGENERATE)
    w = p.window
    tested = p.central & _full_balls(p)
    bad, skipped = [], 0
    for x in np.flatnonzero(tested):
        near = p.ball(x, DIAMOND_REACH)
        below, above = near[p.C[near, x]], near[p.C[x, near]]
        if not len(below) or not len(above):
            skipped += 1
            continue
        far = np.ones(w.n, dtype=bool)
        far[p.ball(x, DIAMOND_BALL)] = False
        P, Q = p.C[below], p.C[:, above].T
        inside = (_f32(P & far) @ _f32(Q).T) < 0.5
        if alexandrov:
            nb = p.ball(x, NEIGHBOUR)
            mid = (w.points[nb] + w.points[x]) / 2
            nb = nb[np.asarray(w.oracle.admissible(mid), dtype=bool)]
            inside &= P[:, nb].all(axis=1)[:, None] & Q[:, nb].all(axis=1)[None, :]
        if not inside.any():
            bad.append(p.pt(x))
    note = f"{skipped} points without nearby past or future skipped" if skipped else ""
    return p.verdict(bad, note)


def _holes(p: _Probe) -> list:
    """Inadmissible lattice points strictly inside the window box that sit in a window diamond."""
    w = p.window
    if w.exact or w.lo is None or w.hi is None:
        return []
    grid = mesh(grid_axes(p.h, w.lo, w.hi))
    if not len(grid):
        return []
    inner = np.ones(len(grid), dtype=bool)
    periodic = w.oracle.periodic or (False,) * w.oracle.dim
    for axis in range(w.oracle.dim):
        if not periodic[axis]:
            inner &= (grid[:, axis] > w.lo[axis] + _SLACK) & (grid[:, axis] < w.hi[axis] - _SLACK)
    holes = grid[inner & ~np.asarray(w.oracle.admissible(grid), dtype=bool)]
    if not len(holes):
        return []
    emb = w.oracle.embed(holes) if w.oracle.embed is not None else holes
    out = []
    for z, e in zip(holes, emb):
        nb = np.asarray(w.tree.query_ball_point(e, NEIGHBOUR * p.h * (1 + _SLACK)), dtype=int)
        if not len(nb):
            continue
        below = p.C[:, nb] & p.central[:, None]
        above = p.C[nb].T & p.central[:, None]
        both = below.any(axis=0) & above.any(axis=0)
        if both.any():
            k = int(np.argmax(both))
            out.append([p.pt(np.argmax(below[:, k])), z.tolist(), p.pt(np.argmax(above[:, k]))])
            if len(out) >= MAX_WITNESSES:
                break
    return out


# ---------------------------------------------------------------- audit


def _combine(p: _Probe, parts: list[RungVerdict], extra: list | None = None, note: str = "") -> RungVerdict:
    values = [r.verdict for r in parts]
    witnesses = [w for r in parts for w in r.witnesses] + (extra or [])
    if False in values or extra:
        return RungVerdict(verdict=False, mode=p.mode, witnesses=witnesses[:MAX_WITNESSES], note=note)
    if None in values:
        return RungVerdict(verdict=None, mode=p.mode, note=note or "depends on an undecided rung")
    return RungVerdict(verdict=True, mode=p.mode, note=note)


def audit(oracle: ChronOracle, window: SampleWindow, workers: int = 1) -> LadderAudit:
    """Evaluate every rung on the window and check the proven implications between them."""
    if window.oracle is not oracle:
        logger.debug("window built on %s, audited against %s", window.oracle.name, oracle.name)
    probe = _Probe(window=window, C=window.chron, K=window.causal,
                   core=window.interior(window.margin), central=_central(window))
    primitives: dict[str, Callable[[_Probe], RungVerdict]] = {
        "past-full": _past_full,
        "full": _full,
        "preregular": _preregular,
        "chronologically-dense": _dense,
        "I-distinguishing": lambda p: _distinguishing(p, p.C),
        "J-distinguishing": lambda p: _distinguishing(p, p.K),
        "past-reflecting": _past_reflecting,
        "future-reflecting": _future_reflecting,
        "inner-continuous": lambda p: _continuity(p, outer=False),
        "outer-continuous": lambda p: _continuity(p, outer=True),
        "J-closed": _j_closed,
        "strongly-causal": lambda p: _diamonds(p, alexandrov=False),
        "Alexandrov": lambda p: _diamonds(p, alexandrov=True),
    }
    names = list(primitives)
    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        results = list(pool.map(lambda name: primitives[name](probe), names))
    rungs = dict(zip(names, results))

    rungs["causally-continuous"] = _combine(probe, [rungs["I-distinguishing"], rungs["outer-continuous"]])
    if window.exact:
        rungs["causally-continuous"] = probe.undecided(DEGENERATE)
    alpha = _alpha_agrees(probe)
    rungs["causally-simple"] = _combine(
        probe, [rungs["J-distinguishing"], rungs["J-closed"]], extra=alpha,
        note="alpha disagrees with the causal relation" if alpha else "",
    )
    rungs["almost-strongly-causal"] = probe.undecided("no computable analogue")
    if window.exact:
        rungs["globally-hyperbolic"] = probe.undecided(DEGENERATE)
    else:
        holes = _holes(probe)
        rungs["globally-hyperbolic"] = _combine(
            probe, [rungs["strongly-causal"], rungs["causally-simple"]], extra=holes,
            note="window diamonds reach holes inside the box" if holes else "",
        )

    violations = []
    for a, b in IMPLICATIONS:
        va, vb = rungs[a].verdict, rungs[b].verdict
        if va is True and vb is False:
            violations.append(f"{a} holds but {b} fails")
    if violations:
        logger.warning("ladder audit of %s breaks proven implications: %s", oracle.name, violations)
    logger.info("ladder audit of %s on %d points", oracle.name, window.n)
    return LadderAudit(space=oracle.name, rungs={k: rungs[k] for k in RUNGS}, implication_violations=violations)


def underline(oracle: ChronOracle, window: SampleWindow) -> np.ndarray:
    """Mask of the largest full subset: drops points whose empty window future (past) is not
    explained by the window ending, i.e. no admissible chronological neighbour lies beyond it."""
    C = window.chron
    no_future = ~C.any(axis=1)
    no_past = ~C.any(axis=0)
    if window.exact:
        return ~(no_future | no_past)
    keep = np.ones(window.n, dtype=bool)
    dirs = _directions() if oracle.dim == 2 else None
    r = window.margin
    for i in np.flatnonzero(no_future | no_past):
        x = window.points[i]
        if dirs is None:
            keep[i] = False
            continue
        probes = x + r * dirs
        ok = np.asarray(oracle.admissible(probes), dtype=bool)
        if no_future[i] and not (ok & np.asarray(oracle.chron(x[None, :], probes), dtype=bool)).any():
            keep[i] = False
        if no_past[i] and not (ok & np.asarray(oracle.chron(probes, x[None, :]), dtype=bool)).any():
            keep[i] = False
    removed = int((~keep).sum())
    if removed:
        logger.info("underline removed %d of %d points of %s", removed, window.n, oracle.name)
    return keep
