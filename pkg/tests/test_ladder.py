"""Causal-ladder audits on gallery windows and explicit relations."""
from __future__ import annotations

import pytest

from causal_horizon.chron.oracle import explicit_oracle
from causal_horizon.gallery import make_space
from causal_horizon.ladder import DEGENERATE, IMPLICATIONS, RUNGS, audit, underline
from causal_horizon.report import render_ladder
from causal_horizon.schemas import RelationDoc


def _chain(n: int):
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    return explicit_oracle(RelationDoc(points=list(range(n)), chron=pairs))


@pytest.fixture(scope="module")
def slit_audit():
    space = make_space("slit", 1 / 8)
    return audit(space.oracle, space.window(1 / 8))


@pytest.fixture(scope="module")
def punctured_audit():
    space = make_space("punctured", 1 / 8)
    return audit(space.oracle, space.window(1 / 8))


def test_audit_covers_every_rung(slit_audit):
    assert tuple(slit_audit.rungs) == RUNGS
    assert slit_audit.space == "slit"
    assert all(r.mode == "window-approximate" for r in slit_audit.rungs.values())


def test_slit_is_not_past_reflecting(slit_audit):
    rung = slit_audit.rungs["past-reflecting"]
    assert rung.verdict is False
    assert rung.witnesses
    assert slit_audit.implication_violations == []


def test_punctured_plane_is_not_causally_simple(punctured_audit):
    assert punctured_audit.rungs["causally-simple"].verdict is False
    assert punctured_audit.implication_violations == []


def test_almost_strong_causality_is_never_decided(slit_audit):
    rung = slit_audit.rungs["almost-strongly-causal"]
    assert rung.verdict is None
    assert rung.note


def test_strip_keeps_the_proven_implications(strip_space, strip_window):
    report = audit(strip_space.oracle, strip_window)
    assert report.implication_violations == []
    for a, b in IMPLICATIONS:
        if report.rungs[a].verdict is True:
            assert report.rungs[b].verdict is not False


def test_explicit_chain_marks_topological_rungs_degenerate():
    oracle, window = _chain(4)
    report = audit(oracle, window)
    assert all(r.mode == "exact" for r in report.rungs.values())
    for name in ("chronologically-dense", "causally-continuous", "globally-hyperbolic"):
        assert report.rungs[name].verdict is None
        assert report.rungs[name].note == DEGENERATE
    assert report.rungs["I-distinguishing"].verdict is True


def test_underline_of_a_chain_drops_its_ends():
    oracle, window = _chain(3)
    assert underline(oracle, window).tolist() == [False, True, False]


def test_underline_keeps_points_whose_cones_leave_the_window(minkowski_space, minkowski_window):
    assert underline(minkowski_space.oracle, minkowski_window).all()


def test_ladder_table(slit_audit):
    space = make_space("slit", 1 / 8)
    table = render_ladder(slit_audit, space.window(1 / 8).meta())
    assert table.startswith("Causal ladder: slit (")
    for name in RUNGS:
        assert name in table
    row = next(line for line in table.splitlines() if line.startswith("past-reflecting"))
    assert row.split()[1] == "no"
    row = next(line for line in table.splitlines() if line.startswith("almost-strongly-causal"))
    assert row.split()[1] == "?"


def test_ladder_table_without_meta():
    oracle, window = _chain(2)
    table = render_ladder(audit(oracle, window))
    assert table.splitlines()[0] == f"Causal ladder: {oracle.name}"
    assert "yes" in table.split()
