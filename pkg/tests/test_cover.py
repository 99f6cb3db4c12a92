import json

import numpy as np
import pytest

from bvlab.cover import (SHADOW_DILATION, dyadic_level, greedy_net, layer, level_separation_violations,
                         partition_of_unity, whitney_cover)
from bvlab.space import DomainSpec, build_domain


def test_dyadic_level_brackets_radius():
    r = np.array([0.3, 0.125, 1e-3, 7.0])
    j = dyadic_level(r)
    assert np.all(2.0 ** (j - 1) < r) and np.all(r <= 2.0**j)


def test_cover_structure(square32):
    disc, cover, pou = square32
    assert cover.coverage_fraction() == 1.0
    assert level_separation_violations(cover) == 0
    d = disc.dist_to_complement[cover.center_idx]
    np.testing.assert_allclose(cover.radii, d / 8, rtol=0, atol=1e-15)
    np.testing.assert_array_equal(cover.levels, dyadic_level(cover.radii))
    assert cover.dropped == ()


def test_same_level_centres_are_separated(square32):
    _, cover, _ = square32
    for j in np.unique(cover.levels):
        c = cover.centers[cover.levels == j]
        if len(c) < 2:
            continue
        d = np.linalg.norm(c[:, None] - c[None], axis=-1) + np.eye(len(c))
        assert d.min() > 2.0 ** (j - 1)


def test_balls_stay_inside(square32):
    disc, cover, _ = square32
    assert np.all(2 * cover.radii < disc.dist_to_complement[cover.center_idx])


def test_shadows(square32):
    disc, cover, _ = square32
    assert cover.has_shadows
    assert np.all(np.diff(cover.U.indptr) > 0)
    b = cover.ball(5)
    q = disc.boundary_points[cover.q_idx[5]]
    d = np.linalg.norm(disc.boundary_points[b.shadow] - q, axis=1)
    assert d.max() < b.radius
    assert set(b.shadow) <= set(b.shadow_star)
    d_star = np.linalg.norm(disc.boundary_points - q, axis=1)
    assert set(np.flatnonzero(d_star < SHADOW_DILATION * b.radius)) == set(b.shadow_star)


def test_partition_of_unity(square32):
    disc, cover, pou = square32
    np.testing.assert_allclose(np.asarray(pou.phi.sum(axis=1)).ravel(), 1.0, atol=1e-12)
    # support containment: phi_b vanishes outside 2B
    coo = pou.phi.tocoo()
    p = disc.interior_points[coo.row]
    dist = np.linalg.norm(p - cover.centers[coo.col], axis=1)
    assert np.all(dist < 2 * cover.radii[coo.col])
    assert np.all(pou.lip * pou.radii <= 10)
    assert pou.lipschitz_constant <= 10


def test_json_and_report(square32):
    _, cover, _ = square32
    data = json.loads(cover.to_json())
    assert len(data) == cover.n_balls and set(data[0]) == {"p", "r", "j", "q"}
    rows = cover.report_rows()
    assert sum(r[1] for r in rows) == cover.n_balls
    assert max(r[2] for r in rows) <= cover.overlap


def test_cover_is_deterministic():
    disc = build_domain(DomainSpec("l-shape", 1 / 32))
    a, b = whitney_cover(disc), whitney_cover(disc)
    np.testing.assert_array_equal(a.center_idx, b.center_idx)
    assert a.overlap == b.overlap


def test_greedy_net_overlap():
    rng = np.random.default_rng(0)
    pts = rng.uniform(0, 1, (2000, 2))
    centers, overlap = greedy_net(pts, 0.05)
    assert 1 <= overlap <= 40
    with pytest.raises(ValueError):
        greedy_net(pts, 0.0)


def test_layer_masks(square32):
    disc, _, _ = square32
    inner = layer(disc, 0.0, 0.1)
    outer = layer(disc, 0.1, 0.5)
    assert not np.any(inner & outer)
    assert np.all(inner | outer)
    with pytest.raises(ValueError):
        layer(disc, 0.2, 0.1)
    with pytest.raises(ValueError):
        layer(disc, 0.0, 0.8)
