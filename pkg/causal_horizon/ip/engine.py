"""Indecomposable past sets on windows: realization, indecomposability, chains, the Budic-Sachs chronology."""
from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from causal_horizon.chron.oracle import ChronOracle, SampleWindow
from causal_horizon.chron.relations import chron_future, joint_future
from causal_horizon.errors import (
    ChainConstructionError,
    ConvergenceError,
    InternalConsistencyError,
    PreconditionError,
)
from causal_horizon.ip.handles import (
    DEFAULT_DEPTH,
    MAX_DEPTH,
    Chain,
    IPHandle,
    Point,
    chain_from_points,
    pip,
)
from causal_horizon.schemas import (
    BSIdentityReport,
    BSVerdict,
    EndpointResult,
    FamilyDoc,
    IndecomposabilityVerdict,
)

logger = logging.getLogger(__name__)

# Maximal layers larger than this skip the split enumeration.
BRUTE_FORCE_LIMIT = 16
# Chain limits closer than this to an inadmissible point are not endpoints (chains stop within rounding slack).
ENDPOINT_ROOM = 1e-6


def realize(A: IPHandle, window: SampleWindow, depth: int = DEFAULT_DEPTH) -> np.ndarray:
    """Window points of A; chain depth doubles up to MAX_DEPTH while the realization still changes."""
    if depth < 1:
        raise PreconditionError(f"evaluation depth must be >= 1, got {depth}")
    mask = A.realize(window, depth)
    if A.formula is not None or not isinstance(A.generator, Chain):
        return mask
    d = depth
    while d < MAX_DEPTH and len(A.generator.chain_points(d)) == d:
        d *= 2
        nxt = A.realize(window, d)
        if np.array_equal(nxt, mask):
            break
        mask = nxt
    return mask


def _f32(M: np.ndarray) -> np.ndarray:
    return np.asarray(M, dtype=np.float32)


def _core(window: SampleWindow, A: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Core K (eroded points with a successor in A) and maximal layer M (points of A without one)."""
    CA = window.columns(A)
    has_succ = CA.any(axis=1) & A
    K = window.erode(A) & has_succ
    M = A & ~has_succ
    return K, M


def is_indecomposable(A: np.ndarray, window: SampleWindow) -> IndecomposabilityVerdict:
    """Synoptic scan over the core, cross-checked by enumerating splits of the maximal layer."""
    A = np.asarray(A, dtype=bool)
    if not A.any():
        raise PreconditionError("indecomposability is undefined for the empty set")
    K, M = _core(window, A)
    k_idx = np.flatnonzero(K)
    a_idx = np.flatnonzero(A)

    witness = None
    synoptic = True
    if k_idx.size:
        CK = window.rows(K)[:, A]
        joint = (_f32(CK) @ _f32(CK).T) > 0.5
        bad = np.argwhere(~joint)
        if bad.size:
            synoptic = False
            p, q = bad[0]
            witness = [window.points[k_idx[p]].tolist(), window.points[k_idx[q]].tolist()]

    brute: bool | None = None
    m_idx = np.flatnonzero(M)
    if m_idx.size <= BRUTE_FORCE_LIMIT:
        brute = not _split_exists(window, k_idx, m_idx)
        if brute != synoptic:
            raise InternalConsistencyError(
                f"synoptic scan says {synoptic}, split search says {brute} on {window.oracle.name}",
                witness=witness,
            )
    logger.debug("indecomposable=%s on %d points (core %d, maximal %d)", synoptic, a_idx.size, k_idx.size, m_idx.size)
    return IndecomposabilityVerdict(indecomposable=synoptic, synoptic=synoptic, brute_force=brute, witness=witness)


def _split_exists(window: SampleWindow, k_idx: np.ndarray, m_idx: np.ndarray) -> bool:
    """A split M = M1 + M2 where neither part lies above every core point."""
    if k_idx.size == 0 or m_idx.size < 2:
        return False
    below = window.chron[np.ix_(k_idx, m_idx)] if window.n <= 4096 else window.oracle.chron_matrix(
        window.points[k_idx], window.points[m_idx])
    full = (1 << k_idx.size) - 1
    bits = [int("".join("1" if b else "0" for b in below[::-1, j]), 2) for j in range(m_idx.size)]
    m = len(bits)
    # M1 always holds element 0; its complement must be nonempty
    for s in range(1 << (m - 1)):
        sel = (s << 1) | 1
        if sel == (1 << m) - 1:
            continue
        d1 = d2 = 0
        for j in range(m):
            if sel >> j & 1:
                d1 |= bits[j]
            else:
                d2 |= bits[j]
        if d1 != full and d2 != full:
            return True
    return False


def chain_for_ip(A: np.ndarray, window: SampleWindow, label: str = "") -> tuple[np.ndarray, IPHandle]:
    """An ascending chron chain inside A whose past covers the core of A.

    Core points are visited by increasing time; each uncovered one gets a successor in
    I+(last) and I+(q) inside A, preferring core points that cover the most.
    """
    A = np.asarray(A, dtype=bool)
    if not A.any():
        raise PreconditionError("cannot build a chain for the empty set")
    K, M = _core(window, A)
    k_idx = np.flatnonzero(K)
    if k_idx.size == 0:
        m_idx = np.flatnonzero(M)
        if m_idx.size == 1:
            return m_idx, chain_from_points(window.points[m_idx], label)
        raise ChainConstructionError(
            f"no core and {m_idx.size} maximal points: set is not synoptic on the window",
            witness=[window.points[i].tolist() for i in m_idx[:2]],
        )

    order = k_idx[np.argsort(window.points[k_idx, 0], kind="stable")]
    pos = {int(i): n for n, i in enumerate(k_idx)}
    C = window.chron
    covered = np.zeros(k_idx.size, dtype=bool)
    chain: list[int] = []
    last = None
    for q in order:
        if covered[pos[int(q)]]:
            continue
        Z = A & C[q]
        if last is not None:
            Z &= C[last]
        if not Z.any():
            blocking = [window.points[last].tolist() if last is not None else None, window.points[q].tolist()]
            raise ChainConstructionError(f"no joint future inside the set for {blocking}", witness=blocking)
        ZK = Z & K
        cand = np.flatnonzero(ZK if ZK.any() else Z)
        gain = (C[np.ix_(k_idx, cand)] & ~covered[:, None]).sum(axis=0)
        z = int(cand[int(np.argmax(gain))])
        chain.append(z)
        covered |= C[k_idx, z]
        last = z
    idx = np.asarray(chain, dtype=int)
    return idx, chain_from_points(window.points[idx], label)


def bs_chron(A: IPHandle, B: IPHandle, window: SampleWindow, depth: int = DEFAULT_DEPTH,
             real_a: np.ndarray | None = None, real_b: np.ndarray | None = None) -> BSVerdict:
    """A <<_BS B: some point of B lies in the joint future of A.

    For a PIP I-(p) the joint future contains J+(p), so any z in B with p <= z is a witness.
    """
    rb = realize(B, window, depth) if real_b is None else real_b
    if not rb.any():
        return BSVerdict(value=False, window_limited=True)
    oracle = window.oracle
    if isinstance(A.generator, Point):
        p = A.generator.array[None, :]
        hits = np.asarray(oracle.causal_relation(p, window.points[rb]), dtype=bool).ravel()
        if hits.any():
            z = window.points[np.flatnonzero(rb)[int(np.argmax(hits))]]
            return BSVerdict(value=True, witness=z.tolist())
        return BSVerdict(value=False, window_limited=True)
    ra = realize(A, window, depth) if real_a is None else real_a
    hits = joint_future(window, ra) & rb
    if ra.any() and hits.any():
        return BSVerdict(value=True, witness=window.points[int(np.argmax(hits))].tolist())
    return BSVerdict(value=False, window_limited=True)


@dataclass
class IPFamilyWindow:
    """Handles realized on one window, with their tolerant inclusion and <<_BS matrices."""

    handles: list[IPHandle]
    window: SampleWindow
    realized: list[np.ndarray]
    subset: np.ndarray
    bs: np.ndarray
    ties: list[tuple[int, int]] = field(default_factory=list)
    depth: int = DEFAULT_DEPTH

    @property
    def size(self) -> int:
        return len(self.handles)

    def to_doc(self) -> FamilyDoc:
        return FamilyDoc(
            window=self.window.meta(),
            handles=[h.descriptor() for h in self.handles],
            subset=self.subset.tolist(),
            bs=self.bs.tolist(),
            ties=self.ties,
        )


def build_family(handles: Sequence[IPHandle], window: SampleWindow, depth: int = DEFAULT_DEPTH,
                 workers: int = 1) -> IPFamilyWindow:
    handles = list(handles)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        realized = list(pool.map(lambda h: realize(h, window, depth), handles))
    n = len(handles)
    subset = np.zeros((n, n), dtype=bool)
    bs = np.zeros((n, n), dtype=bool)
    for i in range(n):
        for j in range(n):
            subset[i, j] = window.subset(realized[i], realized[j])
            bs[i, j] = bs_chron(handles[i], handles[j], window, depth, realized[i], realized[j]).value
    ties = [(i, j) for i in range(n) for j in range(i + 1, n) if subset[i, j] and subset[j, i]]
    if ties:
        logger.warning("family has %d antisymmetry ties within window tolerance", len(ties))
    logger.info("family of %d handles built on %s", n, window.oracle.name)
    return IPFamilyWindow(handles, window, realized, subset, bs, ties, depth)


def _probe_cones(family: IPFamilyWindow) -> tuple[list[np.ndarray], list[np.ndarray]]:
    """Window-PIP probes of I-_IP(A) and I+_IP(A) for every handle A."""
    window = family.window
    K = window.causal
    pasts, futures = [], []
    for h, real in zip(family.handles, family.realized):
        pasts.append(K[:, real].any(axis=1) if real.any() else np.zeros(window.n, dtype=bool))
        if isinstance(h.generator, Point):
            above = np.asarray(window.oracle.causal_relation(h.generator.array[None, :], window.points), dtype=bool).ravel()
            futures.append(chron_future(window, above))
        else:
            jf = joint_future(window, real) if real.any() else np.zeros(window.n, dtype=bool)
            futures.append(chron_future(window, jf))
    return pasts, futures


def check_bs_identity(family: IPFamilyWindow) -> BSIdentityReport:
    """alpha(<<_BS) equals window inclusion on every ordered pair, and the family is past-reflecting."""
    n = family.size
    if n < 2:
        return BSIdentityReport(ok=True, n_pairs=0, ties=family.ties)
    window = family.window
    pasts, futures = _probe_cones(family)
    bs = family.bs
    mismatches: list = []
    reflection: list[tuple[int, int]] = []
    for i in range(n):
        for j in range(n):
            # family handles count as probes too
            past_ok = window.subset(pasts[i], pasts[j]) and not (bs[:, i] & ~bs[:, j]).any()
            future_ok = window.subset(futures[j], futures[i]) and not (bs[j] & ~bs[i]).any()
            alpha = past_ok and future_ok
            if alpha != bool(family.subset[i, j]):
                direction = "alpha-without-subset" if alpha else "subset-without-alpha"
                mismatches.append([i, j, direction])
            if past_ok and not future_ok:
                reflection.append((i, j))
    ok = not mismatches and not reflection
    if not ok:
        logger.warning("<<_BS identity: %d mismatches, %d reflection failures", len(mismatches), len(reflection))
    return BSIdentityReport(ok=ok, n_pairs=n * n, mismatches=mismatches, reflection_failures=reflection,
                            ties=family.ties)


def i_embed(oracle: ChronOracle, p: Sequence[float], label: str = "") -> IPHandle:
    """The PIP I-(p) of an admissible point."""
    oracle.check_admissible(np.asarray(p, dtype=float))
    return pip(p, label=label)


def chain_limit(handle: IPHandle, oracle: ChronOracle, tol: float = 1e-9,
                embed: Callable[[np.ndarray], np.ndarray] | None = None,
                dist: Callable[[np.ndarray, np.ndarray], np.ndarray] | None = None) -> tuple[np.ndarray, int]:
    """Cauchy limit of the (embedded) chain images, doubling depth up to MAX_DEPTH."""
    if not isinstance(handle.generator, Chain):
        raise PreconditionError("chain_limit needs a chain handle")
    embed = embed or (lambda x: x)
    dist = dist or (lambda a, b: np.linalg.norm(np.asarray(a) - np.asarray(b), axis=-1))
    previous = None
    depth = DEFAULT_DEPTH
    while depth <= MAX_DEPTH:
        pts = handle.generator.chain_points(depth)
        images = np.asarray(embed(pts), dtype=float)
        tail = images[-1]
        step = float(dist(images[-1], images[-2])) if len(images) > 1 else 0.0
        if len(pts) < depth or step <= tol:
            return tail, depth
        if previous is not None and float(dist(previous, tail)) <= tol:
            return tail, depth
        previous = tail
        depth *= 2
    raise ConvergenceError(f"chain {handle.label!r} images are not Cauchy at depth {MAX_DEPTH}", witness=handle.label)


def _has_endpoint(window: SampleWindow, limit: np.ndarray) -> bool:
    room = 0.0 if window.exact else ENDPOINT_ROOM
    dim = len(limit)
    stencil = limit[None, :] + room * np.vstack([np.zeros(dim), np.eye(dim), -np.eye(dim)])
    return bool(np.asarray(window.oracle.admissible(stencil), dtype=bool).all())


def future_boundary(family: IPFamilyWindow) -> list[int]:
    """Chain handles with no admissible endpoint, no <<_BS successor in the family and no window joint future."""
    window = family.window
    out = []
    for i, (h, real) in enumerate(zip(family.handles, family.realized)):
        if not isinstance(h.generator, Chain):
            continue
        try:
            limit, _ = chain_limit(h, window.oracle)
            if _has_endpoint(window, limit):
                continue
        except ConvergenceError:
            pass
        if family.bs[i].any():
            continue
        if real.any() and joint_future(window, real).any():
            continue
        out.append(i)
    return out


@dataclass(frozen=True)
class CFCDescriptor:
    """An embedding E of a space into a larger one; `inverse` maps target points back to handles."""

    source: ChronOracle
    target: ChronOracle
    embed: Callable[[np.ndarray], np.ndarray]
    inverse: Callable[[Sequence[float]], IPHandle]
    tol: float = 1e-9


def endpoint_map(cfc: CFCDescriptor, A: IPHandle, window: SampleWindow | None = None,
                 depth: int = DEFAULT_DEPTH) -> EndpointResult:
    """Endpoint of E along a generator; with a window, a second chain from the realized set gives the gap."""
    if isinstance(A.generator, Point):
        e = np.asarray(cfc.embed(A.generator.array[None, :]), dtype=float)[0]
        return EndpointResult(point=e.tolist(), depth=0)
    limit, used = chain_limit(A, cfc.source, cfc.tol, cfc.embed, cfc.target.dist)
    gap = None
    if window is not None:
        real = realize(A, window, depth)
        idx, _ = chain_for_ip(real, window)
        top = np.asarray(cfc.embed(window.points[idx[-1:]]), dtype=float)[0]
        gap = float(cfc.target.dist(top, limit))
    return EndpointResult(point=limit.tolist(), depth=used, second_chain_gap=gap)
