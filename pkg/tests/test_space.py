import json
import math

import numpy as np
import pytest

from bvlab import geometry
from bvlab.space import (L_SHAPE, DomainSpec, MeshTooCoarse, build_domain, codim1_hausdorff,
                         greedy_net_indices, measure_of, regularity_audit, thin_tube_rects)


def test_disc_rect_area_closed_forms():
    r = 0.3
    assert geometry.disc_rect_area(0, 0, r, -1, 1, -1, 1) == pytest.approx(math.pi * r * r, rel=1e-14)
    assert geometry.disc_rect_area(0, 0, r, 0, 1, -1, 1) == pytest.approx(math.pi * r * r / 2, rel=1e-14)
    assert geometry.disc_rect_area(0, 0, r, 0, 1, 0, 1) == pytest.approx(math.pi * r * r / 4, rel=1e-14)
    assert geometry.disc_rect_area(5, 5, r, 0, 1, 0, 1) == 0.0


def test_disc_rect_area_against_fine_grid():
    cx, cy, r = 0.13, -0.07, 0.4
    box = (0.0, 0.5, -0.2, 0.1)
    n = 2000
    xs = np.linspace(box[0], box[1], n + 1)
    ys = np.linspace(box[2], box[3], n + 1)
    xm, ym = (xs[1:] + xs[:-1]) / 2, (ys[1:] + ys[:-1]) / 2
    X, Y = np.meshgrid(xm, ym)
    cell = (box[1] - box[0]) * (box[3] - box[2]) / n**2
    approx = np.sum(np.hypot(X - cx, Y - cy) < r) * cell
    assert geometry.disc_rect_area(cx, cy, r, *box) == pytest.approx(approx, rel=2e-3)


def test_polygon_helpers():
    assert geometry.polygon_area(L_SHAPE) == pytest.approx(0.75)
    inside = geometry.points_in_polygon(np.array([[0.25, 0.75], [0.75, 0.75]]), L_SHAPE)
    assert inside.tolist() == [True, False]


@pytest.mark.parametrize("shape,area", [("unit-square", 1.0), ("l-shape", 0.75), ("disc", math.pi)])
def test_interior_weights_sum_to_area(shape, area):
    disc = build_domain(DomainSpec(shape, 1 / 32))
    assert disc.mu_weights.sum() == pytest.approx(area, rel=0.02)
    assert np.all(disc.dist_to_complement > 0)


def test_square_distance_is_exact():
    disc = build_domain(DomainSpec("unit-square", 1 / 16))
    x, y = disc.interior_points.T
    ref = np.minimum.reduce([x, 1 - x, y, 1 - y])
    np.testing.assert_allclose(disc.dist_to_complement, ref, atol=1e-15)


def test_boundary_weights_match_planar_codim1_measure():
    # for Lebesgue measure the codimension-1 measure of a segment is pi/2 times its length
    disc = build_domain(DomainSpec("unit-square", 1 / 64))
    assert disc.h_weights.sum() == pytest.approx(2 * math.pi, rel=0.05)
    H, _ = codim1_hausdorff(disc)
    assert H == pytest.approx(disc.h_weights.sum(), rel=0.05)


def test_mesh_too_coarse():
    with pytest.raises(MeshTooCoarse):
        build_domain(DomainSpec("l-shape", 0.4))
    with pytest.raises(MeshTooCoarse):
        build_domain(DomainSpec("thin-tubes", 1 / 8, N=4, mode="grid"))


def test_spec_validation_and_round_trip(tmp_path):
    with pytest.raises(ValueError):
        DomainSpec("torus", 0.1)
    with pytest.raises(ValueError):
        DomainSpec("unit-square", 0.0)
    with pytest.raises(ValueError):
        DomainSpec("thin-tubes", 0.1)
    p = tmp_path / "spec.json"
    p.write_text(json.dumps({"shape": "thin-tubes", "h": 0.125, "N": 3}))
    assert DomainSpec.from_json(p) == DomainSpec("thin-tubes", 0.125, N=3)


def test_custom_polygon_matches_square():
    sq = build_domain(DomainSpec("unit-square", 1 / 16))
    cp = build_domain(DomainSpec("custom-polygon", 1 / 16, vertices=((0, 0), (1, 0), (1, 1), (0, 1))))
    np.testing.assert_allclose(sq.interior_points, cp.interior_points)
    assert cp.area == pytest.approx(1.0)


def test_thin_tube_geometry_is_exact():
    rects = thin_tube_rects(4)
    for n in range(1, 5):
        x0, x1, y0, y1 = rects[n]
        assert (x0 + x1) / 2 == pytest.approx(1 / n**2)
        assert x1 - x0 == pytest.approx(2 * 4.0**-n)
        assert y1 == pytest.approx(2.0**-n)
    disc = build_domain(DomainSpec("thin-tubes", 1 / 8, N=4))
    z = np.array([1 / 16, 0.03])
    expected = geometry.disc_rects_area(z, 0.05, rects)
    assert disc.interior_ball_measure(z, 0.05) == pytest.approx(expected, rel=1e-12)
    assert measure_of(disc, np.ones(disc.n_interior, bool)) == pytest.approx(disc.area, rel=1e-12)


def test_greedy_net_is_separated_and_covering():
    rng = np.random.default_rng(1)
    pts = rng.uniform(0, 1, (500, 2))
    idx = greedy_net_indices(pts, 0.1)
    c = pts[idx]
    d = np.linalg.norm(c[:, None] - c[None], axis=-1) + np.eye(len(c)) * 10
    assert d.min() > 0.1
    assert np.linalg.norm(pts[:, None] - c[None], axis=-1).min(axis=1).max() <= 0.1


def test_regularity_audit_square():
    disc = build_domain(DomainSpec("unit-square", 1 / 32))
    rep = regularity_audit(disc, [2.0**-k for k in range(1, 8)], n_samples=50)
    assert rep.ahlfors_pass and rep.density_pass
    assert rep.density_min == pytest.approx(0.25, abs=0.02)   # corner quarter discs
    assert 3 < rep.doubling_constant < 5
    assert len(rep.rows()) == len(rep.boundary_ids) * len(rep.radii)


def test_thin_tube_density_at_tube_top():
    disc = build_domain(DomainSpec("thin-tubes", 1 / 8, N=6))
    x0, x1, _, top = thin_tube_rects(6)[6]
    r = 0.01
    ratio = disc.interior_ball_measure(np.array([(x0 + x1) / 2, top]), r) / (math.pi * r * r)
    exact = geometry.disc_rect_area((x0 + x1) / 2, top, r, x0, x1, top - r, top) / (math.pi * r * r)
    assert ratio == pytest.approx(exact, rel=1e-12)
    # first order: the half ball below the top meets the tube in a width x r strip
    assert ratio == pytest.approx((x1 - x0) * r / (math.pi * r * r), rel=1e-3)
    assert ratio < 0.02
