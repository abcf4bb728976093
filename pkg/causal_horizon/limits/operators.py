"""Set-theoretic and order-theoretic limits of past-set families, and the limit operators L- and L+."""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Literal, Sequence

import numpy as np

from causal_horizon.chron.oracle import SampleWindow
from causal_horizon.chron.relations import chron_past
from causal_horizon.errors import FamilyIncompleteError, InternalConsistencyError, TailMismatchError
from causal_horizon.ip.engine import IPFamilyWindow
from causal_horizon.ip.handles import DEFAULT_DEPTH, IPHandle
from causal_horizon.limits.families import Member, SetSequenceFamily, realize_member
from causal_horizon.schemas import LimitVerdict

logger = logging.getLogger(__name__)

Status = Literal["exact", "stable", "indeterminate"]


@dataclass
class SetLimit:
    mask: np.ndarray
    status: Status


def _spot_check(family: SetSequenceFamily, window: SampleWindow, depth: int) -> None:
    tail = family.tail
    for n in range(max(tail.start, family.start), tail.start + 2 * tail.period):
        expected = realize_member(tail.values[tail.index(n)], window, depth)
        if not np.array_equal(family.realize(window, n, depth), expected):
            raise TailMismatchError(f"family {family.label!r} leaves its tail descriptor at n={n}", witness=n)


def set_limits(family: SetSequenceFamily, window: SampleWindow, horizon: int | None = None,
               depth: int = DEFAULT_DEPTH) -> tuple[SetLimit, SetLimit]:
    """(liminf, limsup) on the window.

    With a tail descriptor both are exact: the intersection and the union of the recurring values.
    Otherwise they are the intersection and union over indices [H/2, H], compared with [H/4, H/2].
    """
    if family.tail is not None:
        _spot_check(family, window, depth)
        vals = [realize_member(family.tail.values[k], window, depth) for k in family.tail.recurring]
        return (SetLimit(np.logical_and.reduce(vals), "exact"),
                SetLimit(np.logical_or.reduce(vals), "exact"))

    late = [family.realize(window, n, depth) for n in family.tail_range(horizon)]
    early = [family.realize(window, n, depth) for n in family.early_range(horizon)]
    inf_late, sup_late = np.logical_and.reduce(late), np.logical_or.reduce(late)
    inf_early, sup_early = np.logical_and.reduce(early), np.logical_or.reduce(early)
    stable = window.same(inf_late, inf_early) and window.same(sup_late, sup_early)
    status: Status = "stable" if stable else "indeterminate"
    if not stable:
        logger.warning("set limits of %r still move at horizon %s", family.label, horizon or family.horizon)
    return SetLimit(inf_late, status), SetLimit(sup_late, status)


def set_liminf(family: SetSequenceFamily, window: SampleWindow, horizon: int | None = None,
               depth: int = DEFAULT_DEPTH) -> SetLimit:
    return set_limits(family, window, horizon, depth)[0]


def set_limsup(family: SetSequenceFamily, window: SampleWindow, horizon: int | None = None,
               depth: int = DEFAULT_DEPTH) -> SetLimit:
    return set_limits(family, window, horizon, depth)[1]


def nearly_past(window: SampleWindow, A: np.ndarray) -> bool:
    """I-(A) inside A up to the window margin."""
    return window.subset(chron_past(window, A), A)


def _locate(fam: IPFamilyWindow, member: Member) -> int:
    for k, h in enumerate(fam.handles):
        if h is member or h == member:
            return k
    raise FamilyIncompleteError(f"{getattr(member, 'label', member)!r} is not in the family window",
                                witness=getattr(member, "label", None))


def _value_indices(family: SetSequenceFamily, fam: IPFamilyWindow, horizon: int | None) -> tuple[list[int], list[int]]:
    """Family-window indices of the values seen eventually always and infinitely often."""
    if family.tail is not None:
        rec = [_locate(fam, family.tail.values[k]) for k in family.tail.recurring]
        return rec, rec
    tail = list(family.tail_range(horizon))
    return [_locate(fam, family(n)) for n in tail], [_locate(fam, family(n)) for n in tail]


def liminf_pm(family: SetSequenceFamily, fam: IPFamilyWindow, horizon: int | None = None) -> np.ndarray:
    """Handles of `fam` below every value of some late tail, by the family's inclusion matrix."""
    always, _ = _value_indices(family, fam, horizon)
    S = fam.subset
    if family.tail is not None:
        return S[:, always].all(axis=1)
    # eventually: below every value from some n in the first half of the tail on
    out = np.zeros(fam.size, dtype=bool)
    for start in range(len(always) // 2 + 1):
        out |= S[:, always[start:]].all(axis=1)
    return out


def limsup_pm(family: SetSequenceFamily, fam: IPFamilyWindow, horizon: int | None = None) -> np.ndarray:
    """Handles below a value met infinitely often (the last quarter of the tail without a descriptor)."""
    _, often = _value_indices(family, fam, horizon)
    if family.tail is None:
        often = often[len(often) // 2 :]
    return fam.subset[:, often].any(axis=1)


def _collapse(window: SampleWindow, idx: list[int], real: list[np.ndarray]) -> list[int]:
    """Keep the largest representative of each group of tolerantly equal candidates."""
    out: list[int] = []
    for i in sorted(idx, key=lambda k: -int(real[k].sum())):
        if not any(window.same(real[i], real[j]) for j in out):
            out.append(i)
    return sorted(out)


def _labels(candidates: Sequence[Member], idx: list[int]) -> list[str]:
    return [getattr(candidates[i], "label", str(i)) for i in idx]


def L_plus(family: SetSequenceFamily, candidates: Sequence[Member], window: SampleWindow,
           horizon: int | None = None, depth: int = DEFAULT_DEPTH,
           fam: IPFamilyWindow | None = None) -> LimitVerdict:
    """Candidates v with I-(liminf a) = I-(v) = I-(limsup a) up to the window margin.

    With a family window, the same test on the unions of liminf-/limsup- handles must agree.
    """
    inf, sup = set_limits(family, window, horizon, depth)
    p_inf = chron_past(window, inf.mask)
    p_sup = chron_past(window, sup.mask)
    real = [realize_member(c, window, depth) for c in candidates]
    hits = [i for i, r in enumerate(real) if window.same(p_inf, r) and window.same(p_sup, r)]
    hits = _collapse(window, hits, real)
    status: Status = "exact" if inf.status == sup.status == "exact" else inf.status

    if fam is not None:
        j_inf = _union(fam, liminf_pm(family, fam, horizon))
        j_sup = _union(fam, limsup_pm(family, fam, horizon))
        j_hits = []
        for i, c in enumerate(candidates):
            if isinstance(c, IPHandle):
                r = fam.realized[_locate(fam, c)]
                if window.same(j_inf, r) and window.same(j_sup, r):
                    j_hits.append(i)
        j_hits = _collapse(window, j_hits, real)
        if j_hits != hits:
            raise InternalConsistencyError(
                f"L+ of {family.label!r}: set limits give {_labels(candidates, hits)}, "
                f"handle limits give {_labels(candidates, j_hits)}",
                witness=[hits, j_hits],
            )

    logger.info("L+(%s) = %s [%s]", family.label, _labels(candidates, hits), status)
    return LimitVerdict(
        operator="L+",
        candidates=hits,
        labels=_labels(candidates, hits),
        status=status,
        diagnostics={"liminf_size": int(inf.mask.sum()), "limsup_size": int(sup.mask.sum()),
                     "past_liminf_size": int(p_inf.sum()), "past_limsup_size": int(p_sup.sum())},
    )


def _union(fam: IPFamilyWindow, sel: np.ndarray) -> np.ndarray:
    out = np.zeros(fam.window.n, dtype=bool)
    for k in np.flatnonzero(sel):
        out |= fam.realized[k]
    return out


def L_minus(family: SetSequenceFamily, candidates: Sequence[Member], window: SampleWindow,
            horizon: int | None = None, depth: int = DEFAULT_DEPTH) -> LimitVerdict:
    """Enumerated candidates inside liminf that are inclusion-maximal among those inside limsup.

    A candidate is dominated by a larger one that pokes out of it beyond one pitch.
    """
    inf, sup = set_limits(family, window, horizon, depth)
    real = [realize_member(c, window, depth) for c in candidates]
    inside = [i for i, r in enumerate(real) if window.subset(r, sup.mask)]
    strict = window.pitch

    def dominated(i: int) -> bool:
        return any(
            j != i and window.subset(real[i], real[j]) and not window.subset(real[j], real[i], strict)
            for j in inside
        )

    maximal = [i for i in inside if not dominated(i)]
    hits = _collapse(window, [i for i in maximal if window.subset(real[i], inf.mask)], real)
    status: Status = "exact" if inf.status == sup.status == "exact" else inf.status
    if not hits and window.erode(inf.mask).any():
        status = "indeterminate"
        logger.warning("L-(%s): no enumerated candidate fits a nonempty liminf", family.label)
    logger.info("L-(%s) = %s [%s]", family.label, _labels(candidates, hits), status)
    return LimitVerdict(
        operator="L-",
        candidates=hits,
        labels=_labels(candidates, hits),
        status=status,
        diagnostics={"inside_limsup": inside, "maximal": maximal},
    )
