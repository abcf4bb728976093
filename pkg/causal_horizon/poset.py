"""Chronologies derived from finite partial orders, causal-set checks and boundary achronality."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Sequence

import networkx as nx
import numpy as np

from causal_horizon.chron.grid import grid_axes, mesh
from causal_horizon.chron.oracle import explicit_oracle
from causal_horizon.chron.relations import MAX_WITNESSES, validate_chron
from causal_horizon.errors import PosetError, PreconditionError
from causal_horizon.ip.engine import realize
from causal_horizon.ip.handles import IPHandle
from causal_horizon.ladder import audit
from causal_horizon.schemas import (
    AchronalityReport,
    FilterReport,
    LadderAudit,
    PosetDoc,
    RelationDoc,
    RelationReport,
    RoundtripReport,
)

logger = logging.getLogger(__name__)

# Antichain enumeration stops here; every finite down-set is generated by one.
MAX_ANTICHAINS = 200_000


def _f32(M: np.ndarray) -> np.ndarray:
    return np.asarray(M, dtype=np.float32)


def _product(*Ms: np.ndarray) -> np.ndarray:
    out = _f32(Ms[0])
    for M in Ms[1:]:
        out = out @ _f32(M)
    return out > 0.5


@dataclass
class FinitePoset:
    """A reflexive partial order on `points`; `leq[i, j]` means point i <= point j."""

    points: list
    leq: np.ndarray
    coords: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self) -> None:
        self.leq = np.asarray(self.leq, dtype=bool)
        self.validate()

    @property
    def n(self) -> int:
        return len(self.points)

    @property
    def strict(self) -> np.ndarray:
        return self.leq & ~np.eye(self.n, dtype=bool)

    @property
    def covers(self) -> np.ndarray:
        """cov[i, j]: i < j with nothing strictly between."""
        S = self.strict
        return S & ~_product(S, S)

    def validate(self) -> None:
        L = self.leq
        if L.shape != (self.n, self.n):
            raise PosetError(f"order matrix has shape {L.shape}, expected ({self.n}, {self.n})")
        bad = np.flatnonzero(~np.diag(L))
        if bad.size:
            raise PosetError(f"order is not reflexive at {self.points[bad[0]]!r}", witness=int(bad[0]))
        sym = np.argwhere(L & L.T & ~np.eye(self.n, dtype=bool))
        if sym.size:
            i, j = sym[0]
            raise PosetError(f"order is not antisymmetric: {self.points[i]!r} and {self.points[j]!r}",
                             witness=[int(i), int(j)])
        gap = np.argwhere(_product(L, L) & ~L)
        if gap.size:
            i, j = gap[0]
            raise PosetError(f"order is not transitive: {self.points[i]!r} -> {self.points[j]!r}",
                             witness=[int(i), int(j)])

    @classmethod
    def from_doc(cls, doc: PosetDoc) -> FinitePoset:
        leq = np.eye(len(doc.points), dtype=bool)
        for i, j in doc.leq:
            leq[i, j] = True
        return cls(list(doc.points), leq)

    @classmethod
    def from_cover(cls, points: Sequence, edges: Sequence[tuple[int, int]]) -> FinitePoset:
        """Reflexive-transitive closure of a relation given by index pairs."""
        g = nx.DiGraph()
        g.add_nodes_from(range(len(points)))
        g.add_edges_from(edges)
        if not nx.is_directed_acyclic_graph(g):
            cycle = nx.find_cycle(g)
            raise PosetError(f"cover relation has a cycle through {cycle[0][0]}", witness=cycle)
        closure = nx.transitive_closure(g, reflexive=True)
        leq = nx.to_numpy_array(closure, nodelist=range(len(points)), dtype=bool)
        return cls(list(points), leq)

    def to_doc(self, relation: np.ndarray | None = None) -> PosetDoc:
        """The order (or another relation on the same points) in the poset JSON schema."""
        R = self.leq if relation is None else np.asarray(relation, dtype=bool)
        return PosetDoc(points=list(self.points), leq=[(int(i), int(j)) for i, j in np.argwhere(R)])


def chain_poset(n: int) -> FinitePoset:
    return FinitePoset.from_cover(list(range(n)), [(i, i + 1) for i in range(n - 1)])


def antichain_poset(n: int) -> FinitePoset:
    return FinitePoset(list(range(n)), np.eye(n, dtype=bool))


def product_of_chains(a: int, b: int) -> FinitePoset:
    """Grid order on {0..a-1} x {0..b-1}: (i, j) <= (k, l) iff i <= k and j <= l."""
    pts = [(i, j) for i in range(a) for j in range(b)]
    P = np.asarray(pts)
    leq = (P[:, None, 0] <= P[None, :, 0]) & (P[:, None, 1] <= P[None, :, 1])
    return FinitePoset(pts, leq, coords=P.astype(float))


def minkowski_grid_poset(h: float, box=((0.0, 0.0), (1.0, 1.0)), jitter: float = 0.0,
                         seed: int = 0) -> FinitePoset:
    """Lattice points of the box under the causal cone order q.t - p.t >= |q.x - p.x|."""
    pts = mesh(grid_axes(h, *box))
    if jitter:
        rng = np.random.default_rng(seed)
        pts = pts + rng.uniform(-jitter * h, jitter * h, size=pts.shape)
    dt = pts[None, :, 0] - pts[:, None, 0]
    dx = np.abs(pts[None, :, 1] - pts[:, None, 1])
    leq = (dt >= dx - 1e-12) | np.eye(len(pts), dtype=bool)
    return FinitePoset([tuple(p) for p in pts.tolist()], leq, coords=pts)


def derive_beta(poset: FinitePoset) -> np.ndarray:
    """x beta y iff x <= y and x < u < v < y for some u, v whose interval [u, v] is not a chain."""
    L, S = poset.leq, poset.strict
    incomparable = _f32(~(L | L.T))
    nonchain = np.zeros_like(L)
    for u in range(poset.n):
        M = L[u][:, None] & L  # M[w, v]: u <= w <= v
        nonchain[u] = ((incomparable @ _f32(M)) * _f32(M)).sum(axis=0) > 0.5
    nonchain &= S
    return _product(S, nonchain, S) & L


def _gamma_half(A: np.ndarray, skip: np.ndarray, target: np.ndarray) -> np.ndarray:
    """H[p, q] = for every a with A[p, a] (not skipped) some b has A[p, b], A[b, a] and target[b, q]."""
    n = len(A)
    out = np.zeros((n, n), dtype=bool)
    for p in range(n):
        quantified = A[p] & ~skip[p]
        if not quantified.any():
            out[p] = True
            continue
        M = A[p][:, None] & A[:, quantified]  # M[b, a]
        exists = (_f32(M).T @ _f32(target)) > 0.5  # exists[a, q]
        out[p] = exists.all(axis=0)
    return out


def derive_gamma(poset: FinitePoset, skip_covers: bool = False, within_order: bool = True) -> np.ndarray:
    """p gamma q iff every a > p has p < b < a with b <= q, and every c < q has c < d < q with p <= d.

    With skip_covers the quantifiers range only over elements that do not cover p (are not covered by q).
    The result is cut down to p < q; without within_order a maximal p relates vacuously to a minimal q.
    """
    L, S = poset.leq, poset.strict
    skip = poset.covers if skip_covers else np.zeros_like(L)
    up = _gamma_half(S, skip, L)
    # the second clause is the first one on the opposite order with the roles of p and q swapped
    down = _gamma_half(S.T, skip.T, L.T).T
    return up & down & S if within_order else up & down


def is_causal_set(poset: FinitePoset, skip_covers: bool = False) -> RelationReport:
    """Chronological-set axioms for gamma of the order."""
    G = derive_gamma(poset, skip_covers)
    doc = RelationDoc(points=list(range(poset.n)), chron=[(int(i), int(j)) for i, j in np.argwhere(G)])
    _, window = explicit_oracle(doc, name="gamma")
    return validate_chron(window)


def _alpha(R: np.ndarray) -> np.ndarray:
    """x alpha y iff I+(y) is inside I+(x) and I-(x) is inside I-(y) for the relation R."""
    not_r = _f32(~R)
    future = (not_r @ _f32(R).T) < 0.5
    past = (_f32(R).T @ not_r) < 0.5
    return future & past


def alpha_gamma_roundtrip(poset: FinitePoset, skip_covers: bool = False,
                          exclude_margin: bool = False) -> RoundtripReport:
    """Compare alpha(gamma(<=)) with <=; margin points have an empty gamma-past or gamma-future."""
    G = derive_gamma(poset, skip_covers)
    A = _alpha(G)
    L = poset.leq
    margin = ~G.any(axis=0) | ~G.any(axis=1)
    involved = margin[:, None] | margin[None, :]
    diff = A != L
    n_margin = int((diff & involved).sum())
    if exclude_margin:
        A = A & ~involved
        L = L & ~involved
    alpha_only = [(int(i), int(j)) for i, j in np.argwhere(A & ~L)]
    leq_only = [(int(i), int(j)) for i, j in np.argwhere(L & ~A)]
    if not alpha_only and not leq_only:
        relation = "equal"
    elif not alpha_only:
        relation = "alpha-proper-subset"
    elif not leq_only:
        relation = "leq-proper-subset"
    else:
        relation = "incomparable"
    logger.info("alpha(gamma) vs order on %d points: %s", poset.n, relation)
    return RoundtripReport(relation=relation, alpha_only=alpha_only[:MAX_WITNESSES],
                           leq_only=leq_only[:MAX_WITNESSES], margin_mismatches=n_margin)


def gamma_cone_disagreement(h: float, skip_covers: bool = True, central: float = 0.25) -> float:
    """Fraction of pairs in the central part of the unit box where gamma differs from the open cone."""
    poset = minkowski_grid_poset(h)
    G = derive_gamma(poset, skip_covers)
    P = poset.coords
    cone = (P[None, :, 0] - P[:, None, 0]) > np.abs(P[None, :, 1] - P[:, None, 1]) + 1e-12
    keep = np.all((P >= central - 1e-9) & (P <= 1 - central + 1e-9), axis=1)
    pair = keep[:, None] & keep[None, :]
    total = int(pair.sum())
    if not total:
        raise PreconditionError(f"no grid points in the central window at h={h}")
    return float((pair & (G != cone)).sum()) / total


def filters(poset: FinitePoset, limit: int = MAX_ANTICHAINS) -> FilterReport:
    """Nonempty down-sets, the up-directed ones among them, and how many are principal ideals."""
    g = nx.DiGraph()
    g.add_nodes_from(range(poset.n))
    g.add_edges_from((int(i), int(j)) for i, j in np.argwhere(poset.strict))
    L = poset.leq
    principal = {tuple(np.flatnonzero(L[:, x])) for x in range(poset.n)}
    n_down = n_directed = n_principal = 0
    for antichain in nx.antichains(g):
        if not antichain:
            continue
        n_down += 1
        if n_down > limit:
            raise PreconditionError(f"more than {limit} down-sets; enumeration stopped")
        down = tuple(np.flatnonzero(L[:, antichain].any(axis=1)))
        # a finite down-set is up-directed iff its maximal antichain is a single element
        if len(antichain) == 1:
            n_directed += 1
            n_principal += down in principal
    return FilterReport(n_down_sets=n_down, n_directed=n_directed, n_principal=n_principal,
                        all_principal=n_directed == n_principal)


def achronality_check(space, handles: Sequence[IPHandle], resolutions: Sequence[float],
                      ladder: LadderAudit | None = None, box=None) -> AchronalityReport:
    """Search windows for points x with A inside I-(x) or A <<_BS I-(x), for each handle A."""
    if ladder is None:
        coarse = space.window(max(resolutions), *(box or (None, None)))
        ladder = audit(space.oracle, coarse)
    gh = ladder.rungs.get("globally-hyperbolic")
    if gh is None or gh.verdict is not True:
        raise PreconditionError(f"{space.name} is not globally hyperbolic on the audited window")

    witnesses = []
    for h in resolutions:
        window = space.window(h, *(box or (None, None)))
        C = window.chron
        not_c = _f32(~C)
        for handle in handles:
            A = realize(handle, window)
            if not A.any():
                continue
            # outside[x] counts points of A not in I-(x)
            outside = _f32(A) @ not_c
            # A <<_BS I-(x) needs A inside I-(b) for some b << x, which already puts A inside I-(x)
            below = np.flatnonzero(outside < 0.5)
            if below.size:
                witnesses.append([handle.label, window.points[below[0]].tolist(), h])
        logger.info("achronality scan of %d handles on %s at h=%g", len(handles), space.name, h)
    return AchronalityReport(ok=not witnesses, resolutions=list(resolutions), witnesses=witnesses)
