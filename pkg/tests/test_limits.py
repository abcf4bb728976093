"""Set limits, L- and L+, and the sequential probes."""
from __future__ import annotations

import networkx as nx
import numpy as np
import pytest

from causal_horizon.chron.relations import chron_past
from causal_horizon.errors import FamilyIncompleteError, PreconditionError, TailMismatchError
from causal_horizon.gallery import make_space
from causal_horizon.ip import build_family, is_indecomposable, pip, realize
from causal_horizon.limits import (
    ArithmeticMap,
    FormulaRegion,
    L_minus,
    L_plus,
    SetSequenceFamily,
    TailDescriptor,
    constant_family,
    liminf_pm,
    limsup_pm,
    set_limits,
)
from causal_horizon.limits.probes import (
    first_order_probe,
    net_limits,
    punched_ball_family,
    rational_points,
    standard_corpus,
    tau_plus_frechet_axioms,
)


def _alternating(tail: bool = True) -> SetSequenceFamily:
    low, high = pip((0.5, 0.3)), pip((0.5, 0.7))
    descriptor = TailDescriptor.periodic([high, low]) if tail else None
    return SetSequenceFamily(lambda n: low if n % 2 else high, "alternating", tail=descriptor, horizon=32)


def test_arithmetic_map_must_increase():
    assert ArithmeticMap(3, 1)(2) == 7
    with pytest.raises(ValueError):
        ArithmeticMap(0)
    with pytest.raises(ValueError):
        ArithmeticMap(1, -1)


def test_tail_descriptor_composition():
    a, b = pip((0.5, 0.3)), pip((0.5, 0.7))
    tail = TailDescriptor.periodic([a, b])
    assert tail.recurring == [0, 1]
    assert tail.compose(ArithmeticMap(2)).recurring == [0]
    assert tail.compose(ArithmeticMap(2, 1)).recurring == [1]


def test_subsequence_shrinks_the_horizon():
    family = SetSequenceFamily(lambda n: pip((0.5, 1 / (n + 1))), "f", horizon=32)
    sub = family.subsequence(ArithmeticMap(2))
    assert sub.horizon == 16
    assert sub(3).label == family(6).label
    with pytest.raises(PreconditionError):
        family(0)


def test_exact_set_limits_of_alternating_family(strip_window):
    inf, sup = set_limits(_alternating(), strip_window)
    low = realize(pip((0.5, 0.3)), strip_window)
    high = realize(pip((0.5, 0.7)), strip_window)
    assert inf.status == sup.status == "exact"
    assert np.array_equal(inf.mask, low & high)
    assert np.array_equal(sup.mask, low | high)


def test_tail_descriptor_is_spot_checked(strip_window):
    low, high = pip((0.5, 0.3)), pip((0.5, 0.7))
    family = SetSequenceFamily(lambda n: low if n % 2 else high, "mislabelled",
                               tail=TailDescriptor.periodic([low, high]))
    with pytest.raises(TailMismatchError):
        set_limits(family, strip_window)


def test_horizon_limits_without_descriptor(strip_window):
    inf, sup = set_limits(_alternating(tail=False), strip_window)
    exact_inf, exact_sup = set_limits(_alternating(), strip_window)
    assert inf.status == "stable"
    assert np.array_equal(inf.mask, exact_inf.mask)
    assert np.array_equal(sup.mask, exact_sup.mask)


def test_alternating_family_has_no_limit(strip_window):
    candidates = [pip((0.5, 0.3)), pip((0.5, 0.7)), pip((0.3, 0.5)), pip((0.5, 0.5))]
    assert L_plus(_alternating(), candidates, strip_window).candidates == []
    assert L_minus(_alternating(), candidates, strip_window).candidates == []


def test_constant_family_limits_are_its_value(strip_window):
    centre, lower = pip((0.5, 0.5)), pip((0.25, 0.5))
    family = constant_family(centre)
    plus = L_plus(family, [centre, lower], strip_window)
    minus = L_minus(family, [centre, lower], strip_window)
    assert plus.candidates == [0] and plus.status == "exact"
    assert minus.candidates == [0]
    assert minus.diagnostics["maximal"] == [0]


def test_l_plus_accepts_formula_regions(strip_window):
    region = FormulaRegion(lambda X: np.asarray(pip((0.5, 0.5)).contains(X, strip_window.oracle)), "cone")
    verdict = L_plus(constant_family(pip((0.5, 0.5))), [region], strip_window)
    assert verdict.candidates == [0]
    assert verdict.labels == ["cone"]


def test_strip_corpus_limits(strip_space):
    for entry in standard_corpus(strip_space, 1 / 16):
        verdict = L_plus(entry.family, entry.candidates, entry.window, entry.horizon)
        expected = [] if entry.limit is None else [entry.limit]
        assert verdict.candidates == expected, entry.family.label


def test_net_over_a_directed_set(strip_window):
    index = nx.DiGraph([(0, 1), (0, 2), (1, 3), (2, 3)])
    values = {0: pip((0.25, 0.5)), 1: pip((0.5, 0.3)), 2: pip((0.5, 0.7)), 3: pip((0.5, 0.5))}
    liminf, limsup = net_limits(values.__getitem__, index, strip_window)
    top = realize(values[3], strip_window)
    assert np.array_equal(liminf, top)
    assert np.array_equal(limsup, top)


def test_net_index_must_be_directed(strip_window):
    with pytest.raises(PreconditionError):
        net_limits(lambda i: pip((0.5, 0.5)), nx.DiGraph([(0, 1), (0, 2)]), strip_window)
    with pytest.raises(PreconditionError):
        net_limits(lambda i: pip((0.5, 0.5)), nx.DiGraph([(0, 1), (1, 0)]), strip_window)


def test_rational_points_fill_the_disc():
    pts = rational_points(5)
    assert pts[0] == (0.0, 0.0)
    assert pts[1:] == [(-0.5, -0.5), (-0.5, 0.0), (-0.5, 0.5), (0.0, -0.5)]
    many = np.asarray(rational_points(60))
    assert len({tuple(p) for p in many}) == 60
    assert (np.linalg.norm(many, axis=1) < 1).all()


def test_punched_ball_misses_each_centre():
    family, ball = punched_ball_family(horizon=16)
    centres = rational_points(64)
    for n in (2, 5, 9):
        c = np.asarray([centres[n - 1]])
        assert not family(n).contains(c)[0]
        assert ball.contains(c)[0]


@pytest.mark.slow
def test_closure_axioms_on_strip_corpus(strip_space):
    report = tau_plus_frechet_axioms(standard_corpus(strip_space, 1 / 16))
    assert report.constant and report.subsequence
    assert report.ok, report.failures


@pytest.mark.slow
def test_first_order_probe_on_slit():
    report = first_order_probe(n_y=8)
    assert report.x_limit_ok
    assert report.probe_in_liminf_past
    assert report.probe_excluded
    # reached through a point below the slit
    assert report.witness[0] < 0.0
    assert report.ok


def test_pm_limits_inside_a_family_window(strip_window):
    low, high, base = pip((0.5, 0.3)), pip((0.5, 0.7)), pip((0.25, 0.5))
    family = SetSequenceFamily(lambda n: low if n % 2 else high, "alternating",
                               tail=TailDescriptor.periodic([high, low]))
    fam = build_family([low, high, base], strip_window)
    assert liminf_pm(family, fam).tolist() == [False, False, True]
    assert limsup_pm(family, fam).tolist() == [True, True, True]
    with pytest.raises(FamilyIncompleteError):
        liminf_pm(family, build_family([low, base], strip_window))


@pytest.fixture(scope="module")
def cylinder_corpus():
    return standard_corpus(make_space("cylinder"), 1 / 16)


def test_corpus_spans_both_spaces(strip_space, cylinder_corpus):
    strip_corpus = standard_corpus(strip_space, 1 / 16)
    assert len(strip_corpus) + len(cylinder_corpus) >= 20
    labels = [e.family.label for e in strip_corpus + cylinder_corpus]
    assert "descending[2n]" in labels and "rising[n+3]" in labels
    assert "alternating[2n]" not in labels


@pytest.mark.slow
def test_l_plus_limits_are_l_minus_candidates(strip_space, cylinder_corpus):
    for entry in standard_corpus(strip_space, 1 / 16) + cylinder_corpus:
        plus = L_plus(entry.family, entry.candidates, entry.window, entry.horizon)
        minus = L_minus(entry.family, entry.candidates, entry.window, entry.horizon)
        assert set(plus.candidates) <= set(minus.candidates), entry.family.label


def test_cylinder_alternating_liminf_splits(cylinder_corpus):
    entry = next(e for e in cylinder_corpus if e.family.label == "alternating")
    window = entry.window
    assert window.pitch == 1 / 8
    inf, _ = set_limits(entry.family, window)
    assert inf.mask.any()
    past = chron_past(window, inf.mask)
    verdict = is_indecomposable(past, window)
    assert not verdict.indecomposable
    p, q = np.asarray(verdict.witness)
    above = window.oracle.chron(p[None, :], window.points) & window.oracle.chron(q[None, :], window.points)
    assert not (np.asarray(above, dtype=bool).ravel() & past).any()
    assert L_plus(entry.family, entry.candidates, window).candidates == []
