"""Sequential diagnostics of L+: the slit diagonal counterexample, closure axioms on a corpus, nets."""
from __future__ import annotations

import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

import networkx as nx
import numpy as np

from causal_horizon.chron.oracle import SampleWindow
from causal_horizon.errors import PreconditionError, UnsupportedSpaceError
from causal_horizon.gallery.flat import slit
from causal_horizon.gallery.space import GallerySpace
from causal_horizon.ip.handles import DEFAULT_DEPTH, pip
from causal_horizon.limits.families import (
    ArithmeticMap,
    FormulaRegion,
    Member,
    SetSequenceFamily,
    constant_family,
    realize_member,
)
from causal_horizon.limits.operators import L_plus
from causal_horizon.schemas import FirstOrderReport, FrechetReport

logger = logging.getLogger(__name__)

PROBE = (-3.0, -1.0)
# This point reaches the causal liminf of x only through J-(0,0): those points meet every x(n) by null
# curves through the slit tip, where the analytic oracle has no push-up, so the point itself never
# sees an x(n) chronologically.
X_LIMIT = (1.0, 1.0)


def x_point(n: int) -> tuple[float, float]:
    return (1.0 + 1.0 / n, 1.0 + 1.0 / n)


def y_point(n: int, k: int) -> tuple[float, float]:
    return (1.0 + 1.0 / n, 1.0 + 1.0 / n + 1.0 / k)


def _with_decoys(p: tuple[float, float], shift: float) -> list[Member]:
    t, x = p
    return [pip(p), pip((t + shift, x)), pip((t - shift, x)), pip((t, x + shift)), pip((t, x - shift))]


def first_order_probe(h: float = 1 / 16, horizon: int = 64, n_y: int = 32, budget: int = 64,
                      depth: int = DEFAULT_DEPTH) -> FirstOrderReport:
    """The slit-plane family x(n) = (1+1/n, 1+1/n) and its approximations y^n(k).

    L+(x) = {(1,1)} and L+(y^n) = {x(n)}, yet no diagonal m -> y^{k(m)}(l(m)) with indices up to
    `budget` reaches the probe point, which lies in the past of the causal liminf of x.
    """
    space = slit()
    oracle = space.oracle
    window = space.window(h, (0.0, -0.5), (3.0, 3.0))
    shift = 4 * h

    x_family = SetSequenceFamily(lambda n: pip(x_point(n)), "x", horizon=horizon)
    x_verdict = L_plus(x_family, _with_decoys(X_LIMIT, shift), window, depth=depth)
    x_ok = x_verdict.candidates == [0]

    y_ok = []
    for j in range(1, n_y + 1):
        fam = SetSequenceFamily(lambda k, j=j: pip(y_point(j, k)), f"y^{j}", horizon=horizon)
        verdict = L_plus(fam, _with_decoys(x_point(j), shift), window, depth=depth)
        y_ok.append(verdict.candidates == [0])

    z = np.asarray(PROBE)
    # causal liminf of x on a window reaching below the slit
    below = space.window(max(h, 1 / 8), PROBE, X_LIMIT)
    xs = np.array([x_point(n) for n in range(max(1, horizon // 2), horizon + 1)])
    causal_inf = np.asarray(oracle.causal_matrix(below.points, xs), dtype=bool).all(axis=1)
    seen_below = np.asarray(oracle.chron(z[None, :], below.points), dtype=bool).ravel() & causal_inf
    in_liminf = bool(seen_below.any())
    w = below.points[int(np.argmax(seen_below))]

    # by push-up, z in I-(limsup) of a diagonal would need z << y^k(l) for some k, l
    ks, ls = np.meshgrid(np.arange(1, budget + 1), np.arange(1, budget + 1), indexing="ij")
    Y = np.stack([1.0 + 1.0 / ks, 1.0 + 1.0 / ks + 1.0 / ls], axis=-1).reshape(-1, 2)
    seen = np.asarray(oracle.chron(z[None, :], Y), dtype=bool)
    excluded = not seen.any()
    witness = Y[int(np.argmax(seen))].tolist() if seen.any() else w.tolist()

    ok = x_ok and all(y_ok) and in_liminf and excluded
    logger.info("first-order probe: x ok=%s, %d/%d y ok, probe in liminf past=%s, excluded=%s",
                x_ok, sum(y_ok), len(y_ok), in_liminf, excluded)
    return FirstOrderReport(
        ok=ok,
        x_limit_ok=x_ok,
        y_limits_ok=y_ok,
        probe_in_liminf_past=in_liminf,
        probe_excluded=excluded,
        n_diagonals=len(Y),
        witness=list(witness),
    )


@dataclass
class CorpusEntry:
    """A family with its candidate limits; `limit` indexes the expected L+ limit, None when it diverges."""

    family: SetSequenceFamily
    candidates: list[Member]
    window: SampleWindow
    limit: int | None = None
    horizon: int | None = None


_SUBSEQUENCES = {"evens": ArithmeticMap(2), "odds": ArithmeticMap(2, 1)}


def tau_plus_frechet_axioms(corpus: Sequence[CorpusEntry], depth: int = DEFAULT_DEPTH) -> FrechetReport:
    """Constant families converge to their value; subsequences keep the limit; every non-limit is
    avoided by some subsequence none of whose further subsequences converges to it."""
    failures: list[str] = []
    witnesses: dict[str, str] = {}
    constant_ok = subsequence_ok = True

    for entry in corpus:
        label = entry.family.label
        verdict = L_plus(entry.family, entry.candidates, entry.window, entry.horizon, depth)
        if entry.limit is not None:
            value = entry.candidates[entry.limit]
            const = L_plus(constant_family(value), entry.candidates, entry.window, depth=depth)
            if entry.limit not in const.candidates:
                constant_ok = False
                failures.append(f"constant {getattr(value, 'label', '')}: got {const.labels}")
            for name, amap in (("2n", ArithmeticMap(2)), ("3n+1", ArithmeticMap(3, 1))):
                sub = entry.family.subsequence(amap, f"{label}[{name}]")
                if entry.limit not in L_plus(sub, entry.candidates, entry.window, depth=depth).candidates:
                    subsequence_ok = False
                    failures.append(f"{label}[{name}] loses its limit")

        for i, cand in enumerate(entry.candidates):
            if i in verdict.candidates:
                continue
            key = f"{label}:{getattr(cand, 'label', i)}"
            for name, amap in _SUBSEQUENCES.items():
                sub = entry.family.subsequence(amap, f"{label}[{name}]")
                if i in L_plus(sub, entry.candidates, entry.window, depth=depth).candidates:
                    continue
                subsub = sub.subsequence(ArithmeticMap(2))
                if i not in L_plus(subsub, entry.candidates, entry.window, depth=depth).candidates:
                    witnesses[key] = name
                    break
            else:
                failures.append(f"{key}: no avoiding subsequence")

    ok = not failures
    if not ok:
        logger.warning("closure axioms fail on %d checks", len(failures))
    return FrechetReport(ok=ok, constant=constant_ok, subsequence=subsequence_ok,
                         non_limit_witnesses=witnesses, failures=failures)


def net_limits(evaluator: Callable[[object], Member], index: nx.DiGraph, window: SampleWindow,
               depth: int = DEFAULT_DEPTH) -> tuple[np.ndarray, np.ndarray]:
    """Eventual-membership liminf and limsup of a net over a finite directed set (edges i -> j mean i <= j)."""
    if not nx.is_directed_acyclic_graph(index):
        raise PreconditionError("index order must be acyclic")
    nodes = list(index.nodes)
    up = {i: {i} | nx.descendants(index, i) for i in nodes}
    for a in nodes:
        for b in nodes:
            if not up[a] & up[b]:
                raise PreconditionError(f"index set is not directed: {a!r} and {b!r} have no upper bound",
                                        witness=[a, b])
    real = {i: realize_member(evaluator(i), window, depth) for i in nodes}
    liminf = np.zeros(window.n, dtype=bool)
    limsup = np.ones(window.n, dtype=bool)
    for i in nodes:
        tail = [real[j] for j in up[i]]
        liminf |= np.logical_and.reduce(tail)
        limsup &= np.logical_or.reduce(tail)
    return liminf, limsup


def rational_points(count: int) -> list[tuple[float, float]]:
    """The first `count` rational points of the open unit disc, ordered by denominator."""
    out: list[tuple[float, float]] = []
    seen: set[tuple[Fraction, Fraction]] = set()
    q = 1
    while len(out) < count:
        for a in range(-q, q + 1):
            for b in range(-q, q + 1):
                key = (Fraction(a, q), Fraction(b, q))
                if key in seen or a * a + b * b >= q * q:
                    continue
                seen.add(key)
                out.append((a / q, b / q))
                if len(out) == count:
                    return out
        q += 1
    return out


def punched_ball_family(horizon: int = 32) -> tuple[SetSequenceFamily, FormulaRegion]:
    """n -> B(0, 1) minus the closed ball B(x(n), 1/n) around the n-th rational point, and B(0, 1).

    Hausdorff distance to the ball tends to 0 while every rational centre is punched once, so
    eroded probes of the ball keep leaving a(n).
    """
    centres = rational_points(4 * horizon)

    def member(n: int) -> FormulaRegion:
        c = np.asarray(centres[n - 1])

        def formula(X: np.ndarray) -> np.ndarray:
            return (np.linalg.norm(X, axis=-1) < 1.0) & (np.linalg.norm(X - c, axis=-1) > 1.0 / n)

        return FormulaRegion(formula, f"ball-minus-B({c[0]:g},{c[1]:g};1/{n})")

    ball = FormulaRegion(lambda X: np.linalg.norm(X, axis=-1) < 1.0, "ball")
    return SetSequenceFamily(member, "punched-ball", horizon=horizon), ball


_VARIANTS = {"2n": ArithmeticMap(2), "n+3": ArithmeticMap(1, 3)}


def standard_corpus(space: GallerySpace, h: float, horizon: int = 32) -> list[CorpusEntry]:
    """Convergent and divergent families with their candidate limits on a gallery space.

    Every convergent family also enters through its [2n] and [n+3] subsequences.
    """
    if space.name == "strip":
        window = deep = space.window(h)
        centre = pip((0.5, 0.5), "(0.5,0.5)")
        edge = space.chart("future")(0.5)
        entries = [
            (lambda n: pip((0.5, 0.5 + (-1) ** n / (4 * (n + 1)))), "zigzag", [centre, edge], 0),
            (lambda n: pip((0.5 + 1 / (2 * (n + 1)), 0.5)), "descending", [centre, edge], 0),
            (lambda n: space.chart("future")(0.5 + 1 / (4 * n)), "edge(1/4n)", [centre, edge], 1),
            (lambda n: pip((0.5, 0.3 if n % 2 else 0.7)), "alternating", [centre, edge], None),
            (lambda n: pip((0.5, (0.3, 0.5, 0.7)[n % 3])), "3-periodic", [centre, edge], None),
        ]
    elif space.name == "cylinder":
        window = space.window(h, (-0.75, -2.0), (0.25, 2.0))
        # the alternating apexes need the whole circle and both lobes below them
        deep = space.window(max(h, 1 / 8), (-3.5, -np.pi), (0.25, np.pi))
        centre = pip((0.0, 0.0), "(0,0)")
        entries = [
            (lambda n: pip((-1 / (n + 1), 0.0)), "rising", [centre], 0),
            (lambda n: pip((0.0, 1 / (n + 1))), "sideways", [centre], 0),
            (lambda n: pip((0.0, 1.0 if n % 2 else -1.0)), "alternating", [centre], None),
        ]
    else:
        raise UnsupportedSpaceError(f"no standard corpus for {space.name}")
    corpus = [CorpusEntry(SetSequenceFamily(f, label, horizon=horizon), cands,
                          window if limit is not None else deep, limit)
              for f, label, cands, limit in entries]
    corpus.append(CorpusEntry(constant_family(entries[0][2][0], horizon=horizon), entries[0][2], window, 0))
    corpus += [
        CorpusEntry(e.family.subsequence(amap, f"{e.family.label}[{name}]"), e.candidates, e.window, e.limit)
        for e in list(corpus) if e.limit is not None
        for name, amap in _VARIANTS.items()
    ]
    return corpus
