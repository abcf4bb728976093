"""Indecomposable past sets on sample windows."""
from __future__ import annotations

import numpy as np
import pytest

from causal_horizon.chron.relations import chron_past
from causal_horizon.errors import ConvergenceError, DomainError, PreconditionError
from causal_horizon.gallery import make_space
from causal_horizon.gallery.cfc import strip_cfc
from causal_horizon.gallery.flat import timelike_infinity
from causal_horizon.ip import (
    bs_chron,
    build_family,
    chain_for_ip,
    check_bs_identity,
    endpoint_map,
    future_boundary,
    i_embed,
    is_indecomposable,
    pip,
    realize,
)
from causal_horizon.ip.engine import chain_limit
from causal_horizon.ip.handles import DEFAULT_DEPTH


def test_pip_is_indecomposable(strip_window):
    A = realize(pip((0.5, 0.5)), strip_window)
    verdict = is_indecomposable(A, strip_window)
    assert verdict.indecomposable
    assert verdict.witness is None


def test_union_of_two_pasts_splits(strip_window):
    A = realize(pip((0.5, 0.25)), strip_window) | realize(pip((0.5, 0.75)), strip_window)
    verdict = is_indecomposable(A, strip_window)
    assert not verdict.indecomposable
    assert verdict.witness is not None


def test_empty_set_has_no_verdict(strip_window):
    with pytest.raises(PreconditionError):
        is_indecomposable(np.zeros(strip_window.n, dtype=bool), strip_window)


def test_chain_for_ip_generates_the_set(strip_window):
    A = realize(pip((0.75, 0.5)), strip_window)
    idx, handle = chain_for_ip(A, strip_window)
    pts = strip_window.points[idx]
    assert strip_window.oracle.chron(pts[:-1], pts[1:]).all()
    assert A[idx].all()
    assert strip_window.same(realize(handle, strip_window), A)


def test_bs_chron_is_witnessed(strip_window):
    low, high = pip((0.25, 0.5)), pip((0.75, 0.5))
    forward = bs_chron(low, high, strip_window)
    assert forward.value
    assert strip_window.oracle.is_causal((0.25, 0.5), forward.witness)
    backward = bs_chron(high, low, strip_window)
    assert not backward.value
    assert backward.window_limited


@pytest.fixture(scope="module")
def fine_strip_window(strip_space):
    return strip_space.window(1 / 32)


def test_family_on_quartile_grid(fine_strip_window):
    qs = (0.25, 0.5, 0.75)
    handles = [pip((t, x)) for t in qs for x in qs]
    family = build_family(handles, fine_strip_window, workers=2)
    assert family.size == 9
    assert family.ties == []
    # (0.25, 0.5) lies below (0.75, 0.5)
    assert family.subset[1, 7] and not family.subset[7, 1]
    assert family.bs[1, 7]
    assert check_bs_identity(family).ok
    assert family.to_doc().window.n_points == fine_strip_window.n


def test_future_edge_tips_form_the_boundary(strip_space, strip_window):
    tips = [strip_space.chart("future")(x) for x in (0.25, 0.5, 0.75)]
    family = build_family([pip((0.5, 0.5)), *tips], strip_window)
    assert future_boundary(family) == [1, 2, 3]


def test_i_embed_rejects_outside_points(strip_space):
    assert i_embed(strip_space.oracle, (0.5, 0.5)).is_proper
    with pytest.raises(DomainError):
        i_embed(strip_space.oracle, (1.5, 0.5))


def test_chain_limit_needs_a_convergent_chain(strip_space):
    with pytest.raises(PreconditionError):
        chain_limit(pip((0.5, 0.5)), strip_space.oracle)
    with pytest.raises(ConvergenceError):
        chain_limit(timelike_infinity(), strip_space.oracle)


def test_endpoint_of_edge_tip(strip_space, strip_window):
    cfc = strip_cfc()
    end = endpoint_map(cfc, strip_space.chart("future")(0.5), strip_window)
    assert end.point == pytest.approx([1.0, 0.5], abs=1e-6)
    assert end.second_chain_gap is not None and end.second_chain_gap <= 2 * strip_window.margin
    interior = endpoint_map(cfc, pip((0.5, 0.5)))
    assert interior.point == [0.5, 0.5]
    assert interior.depth == 0


def test_depth_must_be_positive(strip_window):
    with pytest.raises(PreconditionError):
        realize(pip((0.5, 0.5)), strip_window, depth=0)
    assert DEFAULT_DEPTH >= 1


def test_bs_identity_on_a_cylinder_family():
    cylinder = make_space("cylinder")
    window = cylinder.window(1 / 16, (-1.0, -np.pi), (1.0, np.pi))
    handles = [pip((t, x)) for t in (-0.5, 0.0, 0.5) for x in (-1.0, 0.0, 1.0)]
    family = build_family(handles, window)
    assert family.ties == []
    # (0, 0) lies below (0.5, 0) but not below (0.5, 1)
    assert family.subset[4, 7] and not family.subset[4, 8]
    report = check_bs_identity(family)
    assert report.ok, report.mismatches
    assert report.reflection_failures == []


def _random_pasts(window, rng, count: int = 50) -> list[np.ndarray]:
    """Pasts of one or two apexes drawn from the upper half of the window."""
    mid = 0.5 * (window.lo[0] + window.hi[0])
    upper = np.flatnonzero(window.points[:, 0] >= mid + 2 * window.pitch)
    out = []
    for k in range(count):
        apexes = rng.choice(upper, size=1 + k % 2, replace=False)
        seed = np.zeros(window.n, dtype=bool)
        seed[apexes] = True
        out.append(chron_past(window, seed))
    return out


@pytest.mark.slow
@pytest.mark.parametrize("name, h", [
    ("strip", 1 / 16),
    ("closed-strip", 1 / 16),
    ("minkowski2", 1 / 8),
    ("punctured", 1 / 8),
    ("slit", 1 / 8),
    ("cylinder", 1 / 8),
])
def test_random_pasts_agree_and_rebuild(name, h):
    window = make_space(name).window(h)
    indecomposable = 0
    for A in _random_pasts(window, np.random.default_rng(7)):
        verdict = is_indecomposable(A, window)
        assert verdict.brute_force in (None, verdict.synoptic)
        if verdict.indecomposable:
            indecomposable += 1
            _, handle = chain_for_ip(A, window)
            assert window.same(realize(handle, window), A)
    assert indecomposable >= 25
