"""Convergence verdicts of past-set families: metric tails, inner/outer probes, graph functions, the TFAE battery."""
from __future__ import annotations

import logging
from typing import TYPE_CHECKING, Callable, Iterable, Sequence

import numpy as np

from causal_horizon.chron.oracle import ChronOracle, SampleWindow
from causal_horizon.chron.relations import chron_past
from causal_horizon.errors import UnsupportedSpaceError
from causal_horizon.ip.handles import DEFAULT_DEPTH, IPHandle
from causal_horizon.limits.families import Member, SetSequenceFamily, realize_member
from causal_horizon.limits.operators import L_plus, set_limits
from causal_horizon.metrics.clouds import WEIGHTINGS, MetricCloud, band_weight, d1, d1_tail, delta_mu, hausdorff
from causal_horizon.schemas import IOVerdict, LimitVerdict, TailFit, TFAEVector

if TYPE_CHECKING:
    from causal_horizon.gallery.space import GallerySpace

logger = logging.getLogger(__name__)

DEFAULT_TOL = 1e-3
# Grid-metric floors, in units of the window pitch.
ALLOWANCE_PITCHES = {"d1": 2.0, "hausdorff": 2.0, "graph": 0.0}
_BISECT_STEPS = 48

Metric = Callable[[np.ndarray, np.ndarray, MetricCloud], float]


def tail_fit(ns: Sequence[int], values: Sequence[float], allowance: float = 0.0,
             tol: float = DEFAULT_TOL) -> TailFit:
    """Least-squares g(n) ~ g_inf + C/n; converges iff g_inf <= tol + allowance."""
    g = np.asarray(values, dtype=float)
    n = np.asarray(ns, dtype=float)
    if not np.all(np.isfinite(g)):
        return TailFit(limit=float("inf"), slope=0.0, converges=False, allowance=allowance)
    if len(g) == 1:
        limit, slope = float(g[0]), 0.0
    else:
        A = np.column_stack([np.ones_like(n), 1.0 / n])
        (limit, slope), *_ = np.linalg.lstsq(A, g, rcond=None)
    return TailFit(limit=float(limit), slope=float(slope), converges=bool(limit <= tol + allowance),
                   allowance=allowance)


def trace(family: SetSequenceFamily, candidate: np.ndarray, window: SampleWindow, metric: Metric,
          cloud: MetricCloud, ns: Iterable[int], depth: int = DEFAULT_DEPTH,
          restrict: np.ndarray | None = None) -> list[float]:
    """metric(a(n), candidate) for each n, both optionally cut to a sub-window."""
    keep = np.ones(window.n, dtype=bool) if restrict is None else restrict
    out = []
    for n in ns:
        a = family.realize(window, n, depth) & keep
        c = candidate & keep
        if metric is d1 and (not a.any() or not c.any()):
            out.append(float("inf"))
            continue
        out.append(metric(a, c, cloud))
    return out


def metric_verdict(family: SetSequenceFamily, candidates: Sequence[Member], window: SampleWindow,
                   metric: str = "d1", horizon: int | None = None, tol: float = DEFAULT_TOL,
                   weighting: str = "uniform", base=None, depth: int = DEFAULT_DEPTH) -> LimitVerdict:
    """Candidates the family converges to in d1 or delta_mu, judged by the tail fit."""
    cloud = MetricCloud.from_window(window, base=base, weighting=weighting)
    ns = list(family.tail_range(horizon))
    hits, fits, tails = [], {}, {}
    for i, cand in enumerate(candidates):
        c = realize_member(cand, window, depth)
        if metric == "d1":
            values = trace(family, c, window, d1, cloud, ns, depth)
            allowance = ALLOWANCE_PITCHES["d1"] * window.pitch
            last = family.realize(window, ns[-1], depth)
            tails[getattr(cand, "label", str(i))] = d1_tail(last, c, cloud)
        elif metric == "delta-mu":
            values = trace(family, c, window, delta_mu, cloud, ns, depth)
            allowance = band_weight(window, c, cloud, window.pitch)
        else:
            raise ValueError(f"Unknown metric: {metric}")
        fit = tail_fit(ns, values, allowance, tol)
        fits[getattr(cand, "label", str(i))] = fit.model_dump()
        if fit.converges:
            hits.append(i)
    return LimitVerdict(
        operator="metric-d1" if metric == "d1" else "metric-delta-mu",
        candidates=hits,
        labels=[getattr(candidates[i], "label", str(i)) for i in hits],
        diagnostics={"fits": fits, "tail_bounds": tails, "extent": cloud.extent},
    )


def io_converges(family: SetSequenceFamily, candidate: Member, window: SampleWindow,
                 horizon: int | None = None, budget: int = 20000, depth: int = DEFAULT_DEPTH) -> IOVerdict:
    """Inner and outer convergence on probes at half the window pitch.

    Inner: every probe of the eroded candidate lies in a(n) over the whole tail.
    Outer: every probe of the eroded exterior stays outside a(n) over the whole tail.
    """
    probes = window.oracle.window(window.pitch / 2, window.lo, window.hi)
    if probes.n > budget:
        logger.warning("io probe grid of %d points exceeds the budget %d", probes.n, budget)
        return IOVerdict(inner=None, outer=None, n_probes=probes.n)
    c = realize_member(candidate, probes, depth)
    inner_set = probes.erode(c, window.margin)
    outer_set = probes.erode(~c, window.margin)
    inner = outer = True
    witness = None
    for n in family.tail_range(horizon):
        a = family.realize(probes, n, depth)
        miss = inner_set & ~a
        if inner and miss.any():
            inner = False
            witness = witness or [probes.points[int(np.argmax(miss))].tolist(), n]
        extra = outer_set & a
        if outer and extra.any():
            outer = False
            witness = witness or [probes.points[int(np.argmax(extra))].tolist(), n]
        if not inner and not outer:
            break
    logger.info("io convergence of %r: inner=%s outer=%s", family.label, inner, outer)
    return IOVerdict(inner=inner, outer=outer, witness=witness, n_probes=int(inner_set.sum() + outer_set.sum()))


def _member(A: Member, oracle: ChronOracle, X: np.ndarray, depth: int) -> np.ndarray:
    if isinstance(A, IPHandle):
        return A.member(oracle, X, depth)
    return A.contains(X)


def graph_fn(A: Member, space: GallerySpace, spatial: np.ndarray, t_range: tuple[float, float],
             depth: int = DEFAULT_DEPTH) -> np.ndarray:
    """sup{t in t_range : (t, x) in A} per spatial sample, clipped to the range ends."""
    if not space.product:
        raise UnsupportedSpaceError(f"{space.name} has no product time function")
    spatial = np.atleast_2d(np.asarray(spatial, dtype=float))
    lo, hi = (float(v) for v in t_range)

    def inside(t: np.ndarray) -> np.ndarray:
        return _member(A, space.oracle, np.column_stack([t, spatial]), depth)

    m = len(spatial)
    f = np.full(m, lo)
    top = inside(np.full(m, hi))
    f[top] = hi
    open_ = ~top & inside(np.full(m, lo))
    a = np.full(m, lo)
    b = np.full(m, hi)
    for _ in range(_BISECT_STEPS):
        mid = 0.5 * (a + b)
        ok = inside(mid)
        a = np.where(ok, mid, a)
        b = np.where(ok, b, mid)
    f[open_] = a[open_]
    return f


def spatial_samples(window: SampleWindow, margin: float | None = None) -> np.ndarray:
    """Distinct spatial coordinates of the window, away from non-periodic faces."""
    m = window.margin if margin is None else margin
    keep = np.ones(window.n, dtype=bool)
    if window.lo is not None:
        periodic = window.oracle.periodic or (False,) * window.oracle.dim
        # axis 0 is time and is not eroded
        for axis in range(1, window.oracle.dim):
            if periodic[axis]:
                continue
            keep &= window.points[:, axis] >= window.lo[axis] + m * (1 - 1e-9)
            keep &= window.points[:, axis] <= window.hi[axis] - m * (1 - 1e-9)
    return np.unique(window.points[keep, 1:], axis=0)


def graph_converges(family: SetSequenceFamily, candidate: Member, space: GallerySpace, window: SampleWindow,
                    horizon: int | None = None, tol: float = DEFAULT_TOL, depth: int = DEFAULT_DEPTH) -> TailFit:
    """Tail fit of the sup gap between graph functions on the eroded spatial window."""
    spatial = spatial_samples(window)
    t_range = (window.lo[0], window.hi[0])
    f_inf = graph_fn(candidate, space, spatial, t_range, depth)
    ns = list(family.tail_range(horizon))
    gaps = [float(np.max(np.abs(graph_fn(family(n), space, spatial, t_range, depth) - f_inf))) for n in ns]
    return tail_fit(ns, gaps, ALLOWANCE_PITCHES["graph"] * window.pitch, tol)


def is_lipschitz(f: np.ndarray, spatial: np.ndarray, dist: Callable[[np.ndarray, np.ndarray], np.ndarray],
                 slack: float = 1e-9) -> bool:
    """|f(x) - f(y)| <= d(x, y) for every pair of spatial samples."""
    ok = np.isfinite(f)
    F, X = f[ok], spatial[ok]
    D = dist(X[:, None, :], X[None, :, :])
    return bool(np.all(np.abs(F[:, None] - F[None, :]) <= D + slack))


def central_half(window: SampleWindow) -> np.ndarray:
    """Points in the middle half of the window box along every non-periodic axis."""
    keep = np.ones(window.n, dtype=bool)
    if window.lo is None:
        return keep
    periodic = window.oracle.periodic or (False,) * window.oracle.dim
    for axis in range(window.oracle.dim):
        if periodic[axis]:
            continue
        lo, hi = window.lo[axis], window.hi[axis]
        q = (hi - lo) / 4
        keep &= (window.points[:, axis] >= lo + q) & (window.points[:, axis] <= hi - q)
    return keep


def _all_or_none(flags: Sequence[bool]) -> bool | None:
    if all(flags):
        return True
    if not any(flags):
        return False
    return None


def tfae_battery(family: SetSequenceFamily, candidate: Member, space: GallerySpace, window: SampleWindow,
                 horizon: int | None = None, tol: float = DEFAULT_TOL, weightings: Sequence[str] = WEIGHTINGS,
                 seed: int = 0, depth: int = DEFAULT_DEPTH) -> TFAEVector:
    """Every equivalent form of convergence of `family` to `candidate`, evaluated independently.

    Items: 1 d1, 2 delta_mu for each weighting, 3 Hausdorff on the central half and the eroded window,
    4 pasts of liminf and limsup, 5 interiors, 6 closures, 7 accumulation-point limits, 8 and 9 L+,
    * graph functions. Sub-verdicts that disagree among themselves make their item None.
    """
    h = window.pitch
    ns = list(family.tail_range(horizon))
    cloud = MetricCloud.from_window(window)
    c = realize_member(candidate, window, depth)
    items: dict[str, bool | None] = {}
    fits: dict[str, TailFit] = {}

    fits["1"] = tail_fit(ns, trace(family, c, window, d1, cloud, ns, depth), ALLOWANCE_PITCHES["d1"] * h, tol)
    items["1"] = fits["1"].converges

    flags = []
    for w in weightings:
        cw = cloud.with_weights(w, seed, dim=window.oracle.dim)
        fit = tail_fit(ns, trace(family, c, window, delta_mu, cw, ns, depth), band_weight(window, c, cw, h), tol)
        fits[f"2:{w}"] = fit
        flags.append(fit.converges)
    items["2"] = _all_or_none(flags)

    flags = []
    for name, keep in (("central", central_half(window)), ("eroded", window.interior(window.margin))):
        fit = tail_fit(ns, trace(family, c, window, hausdorff, cloud, ns, depth, restrict=keep),
                       ALLOWANCE_PITCHES["hausdorff"] * h, tol)
        fits[f"3:{name}"] = fit
        flags.append(fit.converges)
    items["3"] = _all_or_none(flags)

    inf, sup = set_limits(family, window, horizon, depth)
    if inf.status == "indeterminate":
        for key in ("4", "5", "6"):
            items[key] = None
    else:
        items["4"] = window.same(chron_past(window, inf.mask), c) and window.same(chron_past(window, sup.mask), c)
        r = 0.75 * window.margin
        c_int = window.erode(c, r)
        items["5"] = window.same(window.erode(inf.mask, r), c_int) and window.same(window.erode(sup.mask, r), c_int)
        c_cl = window.dilate(c, r)
        items["6"] = window.same(window.dilate(inf.mask, r), c_cl) and window.same(window.dilate(sup.mask, r), c_cl)

    near = [window.dilate(family.realize(window, n, depth)) for n in ns]
    tilde_inf = np.logical_and.reduce(near)
    tilde_sup = np.logical_or.reduce(near[len(near) // 2 :])
    c_near = window.dilate(c)
    items["7"] = window.same(tilde_inf, c_near) and window.same(tilde_sup, c_near)

    verdict = L_plus(family, [candidate], window, horizon, depth)
    items["8"] = None if verdict.status == "indeterminate" else verdict.candidates == [0]
    items["9"] = items["8"]

    if space.product:
        fits["*"] = graph_converges(family, candidate, space, window, horizon, tol, depth)
        items["*"] = fits["*"].converges
    else:
        items["*"] = None

    vec = TFAEVector(label=family.label, items=items, fits=fits)
    logger.info("TFAE %s: %s", family.label, items)
    return vec
