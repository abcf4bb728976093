"""Set metrics, tail fits, convergence verdicts and Busemann functions."""
from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from causal_horizon.errors import DomainError, UnsupportedSpaceError
from causal_horizon.gallery import make_space
from causal_horizon.gallery.space import GallerySpace
from causal_horizon.ip import pip
from causal_horizon.limits import SetSequenceFamily, constant_family
from causal_horizon.limits.probes import punched_ball_family, standard_corpus
from causal_horizon.metrics.busemann import (
    GridGraph,
    Ray,
    busemann,
    busemann_distance,
    grapefruit_boundary,
    grapefruit_profile,
)
from causal_horizon.metrics.clouds import MetricCloud, d1, d1_tail, delta_mu, hausdorff
from causal_horizon.metrics.convergence import (
    graph_converges,
    graph_fn,
    io_converges,
    is_lipschitz,
    metric_verdict,
    spatial_samples,
    tail_fit,
    tfae_battery,
)

SLACK = 1e-12
# points of small_minkowski_window
N = 81

masks = st.lists(st.booleans(), min_size=N, max_size=N).map(np.array).filter(lambda m: m.any())


@pytest.fixture(scope="module")
def cloud(small_minkowski_window):
    assert small_minkowski_window.n == N
    return MetricCloud.from_window(small_minkowski_window, weighting="cell")


@given(a=masks, b=masks, c=masks)
@settings(max_examples=60, deadline=None)
def test_d1_is_a_metric(cloud, a, b, c):
    assert d1(a, a, cloud) == 0.0
    assert d1(a, b, cloud) == pytest.approx(d1(b, a, cloud))
    assert d1(a, c, cloud) <= d1(a, b, cloud) + d1(b, c, cloud) + SLACK


@given(a=masks, b=masks, c=masks)
@settings(max_examples=60, deadline=None)
def test_hausdorff_is_a_metric(cloud, a, b, c):
    assert hausdorff(a, b, cloud) == hausdorff(b, a, cloud)
    assert hausdorff(a, c, cloud) <= hausdorff(a, b, cloud) + hausdorff(b, c, cloud) + SLACK


@given(a=masks, b=masks, c=masks)
@settings(max_examples=60, deadline=None)
def test_delta_mu_is_a_pseudometric(cloud, a, b, c):
    assert delta_mu(a, b, cloud) == pytest.approx(delta_mu(b, a, cloud))
    assert delta_mu(a, c, cloud) <= delta_mu(a, b, cloud) + delta_mu(b, c, cloud) + SLACK


@given(seed=st.integers(0, 10_000))
@settings(max_examples=40, deadline=None)
def test_d1_tail_bounds_the_truncated_points(seed):
    rng = np.random.default_rng(seed)
    points = rng.uniform(-4.0, 4.0, size=(300, 2))
    inner = np.linalg.norm(points, axis=1) <= 2.0
    a = inner & (rng.random(300) < 0.3)
    b = inner & (rng.random(300) < 0.3)
    a[np.argmax(inner)] = b[np.argmax(inner)] = True
    whole = MetricCloud(points, np.zeros(2))
    ball = MetricCloud(points[inner], np.zeros(2))
    assert ball.extent <= 2.0
    tail = d1_tail(a[inner], b[inner], ball)
    assert tail == pytest.approx(hausdorff(a[inner], b[inner], ball) * np.exp(-ball.extent))
    assert d1(a, b, whole) <= max(d1(a[inner], b[inner], ball), tail) + SLACK


def test_metric_verdict_reports_tail_bounds(small_minkowski_window):
    family = constant_family(pip((0.5, 0.5)))
    verdict = metric_verdict(family, [pip((0.5, 0.5)), pip((0.0, 0.0))], small_minkowski_window, "d1")
    bounds = verdict.diagnostics["tail_bounds"]
    assert len(bounds) == 2
    assert min(bounds.values()) == 0.0
    assert max(bounds.values()) > 0.0
    assert verdict.diagnostics["extent"] > 0.0


def test_metrics_on_empty_sets(cloud):
    empty = np.zeros(N, dtype=bool)
    full = np.ones(N, dtype=bool)
    assert hausdorff(empty, empty, cloud) == 0.0
    assert hausdorff(empty, full, cloud) == float("inf")
    with pytest.raises(DomainError):
        d1(empty, full, cloud)
    assert delta_mu(empty, full, cloud) == pytest.approx(N / 16)


def test_cloud_weights_are_validated(cloud):
    with pytest.raises(DomainError):
        MetricCloud(cloud.points, cloud.base, weights=np.zeros(N))
    with pytest.raises(DomainError):
        MetricCloud(cloud.points, cloud.base, weights=np.ones(3))
    with pytest.raises(DomainError):
        delta_mu(np.ones(N, dtype=bool), np.zeros(N, dtype=bool), MetricCloud(cloud.points, cloud.base))
    with pytest.raises(ValueError):
        cloud.with_weights("gaussian")


@pytest.mark.parametrize("weighting", ["uniform", "radial", "random"])
def test_normalized_weightings(cloud, weighting):
    weights = cloud.with_weights(weighting, seed=7).weights
    assert weights.sum() == pytest.approx(1.0)
    assert (weights > 0).all()


def test_rebased_cloud_moves_the_damping(cloud):
    far = cloud.rebased(np.array([5.0, 5.0]))
    assert far.damping.max() < cloud.damping.max()


def test_tail_fit():
    ns = list(range(8, 17))
    fit = tail_fit(ns, [1.0 / n for n in ns])
    assert fit.limit == pytest.approx(0.0, abs=1e-9)
    assert fit.slope == pytest.approx(1.0)
    assert fit.converges
    assert not tail_fit(ns, [0.5 + 1.0 / n for n in ns]).converges
    assert tail_fit(ns, [0.5 + 1.0 / n for n in ns], allowance=0.5).converges
    assert not tail_fit(ns, [float("inf")] * len(ns)).converges


def test_d1_picks_the_limit_of_a_descending_family(strip_space, strip_window):
    family = SetSequenceFamily(lambda n: pip((0.5 + 1 / (2 * (n + 1)), 0.5)), "descending", horizon=32)
    candidates = [pip((0.5, 0.5)), strip_space.chart("future")(0.5)]
    assert metric_verdict(family, candidates, strip_window).candidates == [0]
    assert metric_verdict(family, candidates, strip_window, metric="delta-mu").candidates == [0]
    with pytest.raises(ValueError):
        metric_verdict(family, candidates, strip_window, metric="sup")


def test_punched_ball_converges_outer_but_not_inner(minkowski_space):
    window = minkowski_space.window(1 / 16, (-1.5, -1.5), (1.5, 1.5))
    family, ball = punched_ball_family(horizon=32)
    verdict = io_converges(family, ball, window)
    assert verdict.inner is False
    assert verdict.outer is True
    assert verdict.witness is not None


def test_io_budget_gives_no_verdict(minkowski_window):
    family, ball = punched_ball_family(horizon=8)
    verdict = io_converges(family, ball, minkowski_window, budget=10)
    assert verdict.inner is None and verdict.outer is None


def test_graph_function_of_a_cone(strip_space, strip_window):
    spatial = spatial_samples(strip_window)
    f = graph_fn(pip((0.5, 0.5)), strip_space, spatial, (0.0, 1.0))
    expected = 0.5 - np.abs(spatial[:, 0] - 0.5)
    assert f == pytest.approx(expected, abs=1e-9)
    assert is_lipschitz(f, spatial, lambda a, b: np.abs(a - b)[..., 0])
    assert not is_lipschitz(2 * f, spatial, lambda a, b: np.abs(a - b)[..., 0])


def test_graph_functions_converge_for_a_descending_family(strip_space, strip_window):
    family = SetSequenceFamily(lambda n: pip((0.5 + 1 / (2 * (n + 1)), 0.5)), "descending", horizon=32)
    assert graph_converges(family, pip((0.5, 0.5)), strip_space, strip_window, tol=1e-2).converges


def test_graph_function_needs_a_product(strip_space):
    flat = GallerySpace("no-time", strip_space.oracle, strip_space.box, product=False)
    with pytest.raises(UnsupportedSpaceError):
        graph_fn(pip((0.5, 0.5)), flat, np.array([[0.5]]), (0.0, 1.0))


def test_grapefruit_profile():
    assert grapefruit_profile([0.0, 1.0, 1.5, 2.0, 3.0]).tolist() == pytest.approx([2.0, 2.0, 1.5, 1.0, 1.0])


def test_flat_grid_distances():
    graph = GridGraph((0.0, 0.0), (1.0, 1.0), 1 / 4)
    assert graph.n == 25
    D = graph.distances([graph.nearest(np.array([0.0, 0.0]))])
    assert D[0, graph.nearest(np.array([1.0, 1.0]))] == pytest.approx(np.sqrt(2))
    assert D[0, graph.nearest(np.array([1.0, 0.5]))] == pytest.approx(0.5 * np.sqrt(2) + 0.5)


def test_flat_busemann_function_is_the_coordinate():
    graph = GridGraph((-2.0, -2.0), (20.0, 2.0), 1 / 4)
    nodes = np.flatnonzero(np.abs(graph.coords[:, 0]) <= 2.0)
    b = busemann(Ray((0.0, 0.0), (1.0, 0.0), "x"), graph, 16.0, nodes)
    assert b.finite
    assert b.drift == pytest.approx(0.0, abs=1e-9)
    on_axis = np.abs(graph.coords[nodes, 1]) < 1e-12
    assert b.values[on_axis] == pytest.approx(graph.coords[nodes[on_axis], 0])


def test_busemann_distance_ignores_constants():
    b = np.array([0.0, 1.0, 3.0])
    assert busemann_distance(b + 2.5, b) == pytest.approx(0.0)
    assert busemann_distance(np.array([0.0, 1.0]), np.zeros(2)) == pytest.approx(0.5)
    assert busemann_distance(np.array([np.inf, 0.0]), np.zeros(2)) == float("inf")


@pytest.mark.slow
def test_grapefruit_boundary_has_two_components():
    report = grapefruit_boundary()
    assert len(report.components) == 2
    assert report.monotone
    assert all(report.finite)
    assert report.min_cross >= 2.0 - 0.1


def test_tfae_battery_on_strip_families(strip_space, strip_window):
    centre = pip((0.5, 0.5))
    down = SetSequenceFamily(lambda n: pip((0.5 + 1 / (2 * (n + 1)), 0.5)), "descending", horizon=32)
    swing = SetSequenceFamily(lambda n: pip((0.5, 0.3 if n % 2 else 0.7)), "alternating", horizon=32)
    yes = tfae_battery(down, centre, strip_space, strip_window)
    no = tfae_battery(swing, centre, strip_space, strip_window)
    assert set(yes.items) == {"1", "2", "3", "4", "5", "6", "7", "8", "9", "*"}
    assert yes.core_constant and yes.items["1"] is True
    assert no.core_constant and no.items["1"] is False


@pytest.mark.slow
def test_tfae_items_agree_across_the_corpus(strip_space):
    vectors = []
    for space in (strip_space, make_space("cylinder")):
        for entry in standard_corpus(space, 1 / 16):
            candidate = entry.candidates[entry.limit or 0]
            vec = tfae_battery(entry.family, candidate, space, entry.window, entry.horizon)
            vectors.append((entry.limit is not None, vec))
    assert sum(convergent for convergent, _ in vectors) >= 5
    assert sum(not convergent for convergent, _ in vectors) >= 3
    for convergent, vec in vectors:
        assert vec.core_constant, (vec.label, vec.items)
        assert vec.items["1"] is convergent, vec.label
