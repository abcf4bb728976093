"""Oracles, sample windows and the chronological-set axioms."""
from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from pydantic import ValidationError

from causal_horizon.chron.oracle import explicit_oracle
from causal_horizon.chron.relations import (
    alpha_causal,
    check_pushup,
    chron_future,
    chron_past,
    chron_within_alpha,
    joint_future,
    validate_chron,
)
from causal_horizon.errors import DomainError
from causal_horizon.gallery.cylinder import cylinder_chron
from causal_horizon.gallery.flat import minkowski_chron
from causal_horizon.ip.handles import pip
from causal_horizon.schemas import RelationDoc


def _explicit(n, pairs):
    return explicit_oracle(RelationDoc(points=list(range(n)), chron=pairs))[1]


def test_empty_relation_is_not_connex():
    report = validate_chron(_explicit(3, []))
    assert report.irreflexive and report.transitive
    assert report.connex is False
    assert len(report.witnesses["connex"]) == 3
    assert not report.is_chronological_set


def test_missing_transitive_pair_has_triple_witness():
    report = validate_chron(_explicit(3, [(0, 1), (1, 2)]))
    assert report.transitive is False
    assert report.witnesses["transitive"] == [[[0.0], [1.0], [2.0]]]


def test_reflexive_pair_breaks_irreflexivity():
    report = validate_chron(_explicit(2, [(0, 0), (0, 1)]))
    assert report.irreflexive is False


def test_finite_chain_is_not_separable():
    report = validate_chron(_explicit(3, [(0, 1), (1, 2), (0, 2)]))
    assert report.irreflexive and report.transitive and report.connex
    assert report.separable is False
    assert [[0.0], [1.0]] in report.witnesses["separable"]


def test_relation_doc_rejects_out_of_range_pairs():
    with pytest.raises(ValidationError):
        RelationDoc(points=[0, 1], chron=[(0, 2)])


def test_pasts_and_joint_futures_on_explicit_relation():
    w = _explicit(3, [(0, 1), (1, 2), (0, 2)])
    top = np.array([False, False, True])
    assert chron_past(w, top).tolist() == [True, True, False]
    assert chron_future(w, np.array([True, False, False])).tolist() == [False, True, True]
    assert joint_future(w, np.array([True, True, False])).tolist() == [False, False, True]
    assert joint_future(w, np.zeros(3, dtype=bool)).all()


def test_strip_window_geometry(strip_window):
    assert strip_window.n == 15 * 15
    assert strip_window.margin == pytest.approx(1 / 8)
    assert strip_window.points[strip_window.index_of((0.5, 0.5))].tolist() == [0.5, 0.5]
    assert strip_window.interior(strip_window.margin).sum() == 13 * 13
    one = np.zeros(strip_window.n, dtype=bool)
    one[strip_window.index_of((0.5, 0.5))] = True
    assert strip_window.dilate(one).sum() == 13


def test_tolerant_inclusion_ignores_null_boundary(strip_window):
    a = pip((0.5, 0.5)).realize(strip_window)
    b = pip((0.501, 0.5)).realize(strip_window)
    assert (a & ~b).sum() == 0
    assert (b & ~a).any()
    assert strip_window.same(a, b)
    c = pip((0.75, 0.5)).realize(strip_window)
    assert strip_window.subset(a, c)
    assert not strip_window.subset(c, a)
    assert strip_window.subset_witness(c, a) is not None


def test_inadmissible_points_raise_domain_error(strip_space):
    with pytest.raises(DomainError) as exc:
        strip_space.oracle.check_admissible([[0.5, 0.5], [1.5, 0.5]])
    assert exc.value.witness == [1.5, 0.5]


def test_minkowski_window_axioms(minkowski_window):
    report = validate_chron(minkowski_window)
    assert report.irreflexive and report.transitive
    assert check_pushup(minkowski_window, leq=minkowski_window.causal).ok
    assert chron_within_alpha(minkowski_window) == []


def test_alpha_contains_chron_and_is_reflexive(minkowski_window):
    A = alpha_causal(minkowski_window)
    assert np.diag(A).all()
    assert not (minkowski_window.chron & ~A).any()


def test_restrict_keeps_pitch_and_box(strip_window):
    sub = strip_window.restrict(strip_window.points[:, 0] < 0.5)
    assert sub.pitch == strip_window.pitch
    assert sub.n == 7 * 15
    assert sub.meta().space == "strip"


_coords = st.floats(min_value=-2.0, max_value=2.0, allow_nan=False)
_point = st.tuples(_coords, _coords)


@given(_point, _point, _point)
@settings(max_examples=200, deadline=None)
def test_minkowski_chron_is_transitive(p, q, r):
    p, q, r = (np.asarray(v) for v in (p, q, r))
    if minkowski_chron(p, q) and minkowski_chron(q, r):
        assert minkowski_chron(p, r)


@given(_point, _point, _point)
@settings(max_examples=200, deadline=None)
def test_cylinder_chron_is_transitive_and_irreflexive(p, q, r):
    p, q, r = (np.asarray(v) for v in (p, q, r))
    assert not cylinder_chron(p, p)
    if cylinder_chron(p, q) and cylinder_chron(q, r):
        assert cylinder_chron(p, r)
