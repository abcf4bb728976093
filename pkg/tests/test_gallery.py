"""Model spacetimes: analytic chronologies, warped products, lattice cross-checks and the strip endpoint map."""
from __future__ import annotations

from pathlib import Path

import numpy as np
import pytest
from pydantic import ValidationError

from causal_horizon.errors import ConditionStarViolated, SteppingError, UnsupportedSpaceError
from causal_horizon.gallery import SPACES, make_space, warp_completion, warp_space
from causal_horizon.gallery.cfc import respect_check, strip_cfc
from causal_horizon.gallery.crosscheck import cross_validate, lattice_reach
from causal_horizon.gallery.warped import WarpedSpace, WarpExpr, factor_graph, star_integral, subdivide
from causal_horizon.io import load_json
from causal_horizon.schemas import WarpFactorDoc, WarpSpecDoc

SAMPLES = Path(__file__).resolve().parent.parent / "samples"


def _segment_spec(**kwargs) -> WarpSpecDoc:
    doc = {"a": 0.0, "b": 1.0, "dt": 0.125,
           "factors": [{"graph": {"kind": "segment", "n": 2, "length": 1.0}, "warp": "1"}]}
    doc.update(kwargs)
    return WarpSpecDoc.model_validate(doc)


def _cycle_spec(warp: str = "(b-t)^-4") -> WarpSpecDoc:
    return WarpSpecDoc.model_validate({
        "a": 0.0, "b": 1.0, "dt": 0.125,
        "factors": [{"graph": {"kind": "cycle", "n": 4, "length": 1.0}, "warp": warp}],
    })


def test_every_space_builds():
    assert set(SPACES) == {"strip", "closed-strip", "minkowski2", "punctured", "slit", "cylinder", "grapefruit"}
    assert make_space("strip").cfc is not None
    with pytest.raises(ValueError, match="Unknown space"):
        make_space("torus")
    with pytest.raises(ValueError):
        make_space("strip", h=0.0)
    with pytest.raises(ValueError, match="Unknown chart"):
        make_space("strip").chart("past")


def test_slit_blocks_curves_through_the_ray():
    oracle = make_space("slit").oracle
    assert not oracle.is_chron((-1.0, 1.0), (1.0, 1.0))
    assert oracle.is_chron((-1.0, -0.5), (1.0, -0.5))
    assert oracle.is_chron((0.5, 1.0), (1.0, 1.0))


def test_punctured_plane_drops_null_pairs_through_the_origin():
    oracle = make_space("punctured").oracle
    assert not oracle.is_causal((-1.0, -1.0), (1.0, 1.0))
    assert oracle.is_causal((-1.0, -1.0), (1.5, 1.0))
    assert make_space("minkowski2").oracle.is_causal((-1.0, -1.0), (1.0, 1.0))


def test_cylinder_wraps_around():
    space = make_space("cylinder")
    assert space.oracle.is_chron((0.0, 3.0), (0.5, -3.0))
    assert not make_space("minkowski2").oracle.is_chron((0.0, 3.0), (0.5, -3.0))
    handle = space.chart("pip")((0.0, 4.0))
    assert handle.generator.p[1] == pytest.approx(4.0 - 2 * np.pi)
    assert space.window(1 / 4).n == 17 * 25


def test_grapefruit_stick_is_slow():
    oracle = make_space("grapefruit").oracle
    assert oracle.is_chron((0.0, 0.0, 0.0), (2.0, 1.0, 0.0))
    assert not oracle.is_chron((0.0, 0.0, 0.0), (1.2, 1.0, 0.0))
    assert oracle.is_chron((0.0, 0.0, 3.0), (1.2, 1.0, 3.0))


def test_lattice_paths_agree_with_cones():
    flat = make_space("minkowski2").oracle
    assert lattice_reach(flat, (0.0, 0.0), (1.0, 0.0), 1 / 16)
    assert not lattice_reach(flat, (0.0, 0.0), (1.0, 1.5), 1 / 16)
    slit = make_space("slit").oracle
    assert not lattice_reach(slit, (-1.0, 1.0), (1.0, 1.0), 1 / 16)
    assert lattice_reach(slit, (-1.0, -0.5), (1.0, -0.5), 1 / 16)


@pytest.mark.parametrize("name", ["minkowski2", "slit", "punctured"])
def test_cross_validation(name):
    report = cross_validate(make_space(name), n_pairs=40, seed=3)
    assert report.n_pairs > 0
    assert report.ok, report.disagreements


def test_cross_validation_needs_a_lattice_search():
    with pytest.raises(UnsupportedSpaceError):
        cross_validate(make_space("grapefruit"))


def test_warp_expressions():
    expr = WarpExpr.parse("2*(b-t)^-4 + 1", 1.0)
    assert expr.terms == ((2.0, -4.0), (1.0, 0.0))
    assert float(expr(0.0)) == pytest.approx(3.0)
    assert float(WarpExpr.parse("(b-t)^2", 3.0)(1.0)) == pytest.approx(4.0)
    with pytest.raises(ValueError, match="Unknown warp term"):
        WarpExpr.parse("sin(t)", 1.0)


def test_condition_star_integrals():
    assert star_integral(WarpExpr.parse("(b-t)^-4", 1.0), 0.5) == pytest.approx(1 / 24, abs=1e-4)
    assert star_integral(WarpExpr.parse("1", 1.0), 0.5) == pytest.approx(0.5, abs=1e-4)
    with pytest.raises(ConditionStarViolated) as exc:
        star_integral(WarpExpr.parse("(b-t)^2", 1.0), 0.5, factor=1)
    assert exc.value.factor == 1
    assert exc.value.expression == "(b-t)^2"


def test_factor_graphs():
    cycle = factor_graph(WarpFactorDoc(graph={"kind": "cycle", "n": 4, "length": 4.0}))
    assert cycle.number_of_edges() == 4
    fine = subdivide(cycle, 0.25)
    assert fine.number_of_nodes() == 16
    assert all(d["length"] == pytest.approx(0.25) for *_, d in fine.edges(data=True))
    edges = factor_graph(WarpFactorDoc(graph={"edges": [[0, 1, 0.5], [1, 2, 1.5]]}))
    assert sorted(edges.nodes) == [0, 1, 2]
    with pytest.raises(ValueError):
        factor_graph(WarpFactorDoc(graph={"kind": "segment", "n": 1}))
    with pytest.raises(ValueError):
        factor_graph(WarpFactorDoc(graph={"kind": "tree", "n": 3}))


def test_warp_spec_validation():
    with pytest.raises(ValidationError):
        _segment_spec(a=1.0, b=0.0)
    with pytest.raises(ValidationError):
        _segment_spec(dt=0.0)
    with pytest.raises(SteppingError):
        WarpedSpace.from_spec(_segment_spec(dt=0.3))


def test_warped_reachability_respects_light_speed():
    space = WarpedSpace.from_spec(_segment_spec())
    # node 1 is the far end of the unit segment, node 16 lies 15/32 along it
    assert space.shape == (33,)
    assert space.oracle.is_chron((0.125, 0.0), (0.875, 16.0))
    assert not space.oracle.is_chron((0.125, 0.0), (0.875, 1.0))
    assert not space.oracle.is_chron((0.5, 0.0), (0.5, 2.0))
    with pytest.raises(SteppingError):
        space.chron(np.array([0.3, 0.0]), np.array([0.875, 16.0]))


def test_warped_gallery_space():
    space = warp_space(_cycle_spec())
    assert space.name == "warped"
    handle = space.chart("future")((0.0,))
    assert not handle.is_proper
    assert space.window(0.125).n == 7 * 32


def test_warped_completion_matches_the_chart():
    report = warp_completion(_cycle_spec())
    assert report.ok
    assert report.agreement == 1.0
    assert report.chart == [[1.0, float(v)] for v in range(4)]
    assert report.classified == report.chart
    assert all(0.0 < e <= 1e-7 for e in report.endpoint_errors)
    assert all(limit[0] < 1.0 for limit in report.limits)
    assert report.star_integrals[0] == pytest.approx(1 / 24, abs=1e-4)


def test_warped_boundary_chains_stay_inside():
    space = WarpedSpace.from_spec(_cycle_spec())
    pts = space.boundary_handle((0.0,)).generator.chain_points(64)
    assert len(pts) < 64
    assert np.asarray(space.admissible(pts)).all()
    assert np.all(np.diff(pts[:, 0]) > 0)
    # the walk starts half an edge away and settles on the vertex
    assert pts[0, 1] != 0.0 and pts[-1, 1] == 0.0
    assert space.classify(pts[-1]) == [0.0]


def test_warped_frozen_fibre_keeps_its_start():
    space = WarpedSpace.from_spec(_cycle_spec())
    far = space.good_path([2], [0])
    # (b-t)^-4 leaves too little budget to cross half the cycle
    assert far[-1, 0] == pytest.approx(0.875)
    assert far[-1, 1] != 0.0
    assert space.classify(far[-1]) != [0.0]


@pytest.mark.slow
@pytest.mark.parametrize("name", ["warp_cycle.json", "warp_segment.json"])
def test_warped_completion_on_sample_specs(name):
    spec = load_json(SAMPLES / name, WarpSpecDoc)
    report = warp_completion(spec)
    assert report.ok
    assert report.n_handles == 10
    assert report.agreement == 1.0
    assert len(report.chart) == 32
    assert report.classified == [[1.0, v] for v in (0.0, 8.0, 16.0, 23.0, 31.0)]
    assert all(e <= 2 * spec.dt for e in report.endpoint_errors)
    assert all(np.isfinite(report.star_integrals))


def test_warped_completion_refuses_divergent_warps():
    with pytest.raises(ConditionStarViolated):
        warp_completion(_cycle_spec("(b-t)^2"))


def test_strip_endpoint_inverse():
    cfc = strip_cfc()
    assert cfc.inverse((0.5, 0.5)).is_proper
    assert not cfc.inverse((1.0, 0.5)).is_proper


@pytest.mark.slow
def test_strip_endpoint_map_respects_convergence():
    report = respect_check(h=1 / 16)
    assert report.inverse_ok
    assert report.max_endpoint_error <= 1 / 8
    assert all(report.convergence_agreement)
    assert report.ok
