"""Finite discretizations of planar domains and their measures.

A :class:`Discretization` samples a bounded planar domain with weighted
interior points (Lebesgue measure) and weighted boundary points carrying the
co-dimension 1 Hausdorff measure. The ambient space is the Euclidean plane
with Lebesgue measure, so ``mu(B(x, r)) = pi r^2`` for every ball.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np
from scipy.spatial import cKDTree

from . import geometry

SHAPES = ("unit-square", "disc", "slit-disc", "l-shape", "thin-tubes", "custom-polygon")

L_SHAPE = np.array([[0, 0], [1, 0], [1, 0.5], [0.5, 0.5], [0.5, 1], [0, 1]], dtype=float)


class MeshTooCoarse(ValueError):
    """The mesh parameter cannot resolve the requested geometry."""


@dataclass(frozen=True)
class DomainSpec:
    """Which domain to build and how finely.

    ``mode`` only matters for thin tubes: ``"exact"`` refines each tube to its
    own width and evaluates ball measures in closed form, ``"grid"`` uses the
    same spacing everywhere.
    """

    shape: str
    h: float
    N: int | None = None
    mode: str = "exact"
    seed: int = 0
    vertices: tuple | None = None

    def __post_init__(self):
        if self.shape not in SHAPES:
            raise ValueError(f"unknown shape tag {self.shape!r}")
        if not self.h > 0:
            raise ValueError("mesh parameter h must be positive")
        if self.shape == "thin-tubes":
            if self.N is None or self.N < 1:
                raise ValueError("thin-tubes needs a tube count N >= 1")
            if self.mode not in ("exact", "grid"):
                raise ValueError(f"unknown thin-tubes mode {self.mode!r}")
        if self.shape == "custom-polygon" and (self.vertices is None or len(self.vertices) < 3):
            raise ValueError("custom-polygon needs at least three vertices")

    @classmethod
    def from_dict(cls, d: dict) -> "DomainSpec":
        verts = d.get("vertices")
        return cls(shape=d["shape"], h=float(d["h"]), N=d.get("N"),
                   mode=d.get("mode", "exact"), seed=int(d.get("seed", 0)),
                   vertices=None if verts is None else tuple(map(tuple, verts)))

    @classmethod
    def from_json(cls, path) -> "DomainSpec":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


@dataclass(frozen=True, eq=False)
class Discretization:
    """Weighted samples of a domain and of its boundary.

    ``boundary_ds`` is the arc length owned by each boundary sample, ``h_weights``
    its co-dimension 1 Hausdorff weight. ``local_h`` is the sample spacing at each
    interior point (uniform except for refined thin tubes). ``rects`` is set when
    the domain is a disjoint union of axis-aligned rectangles whose ball measures
    are evaluated exactly.
    """

    shape: str
    interior_points: np.ndarray
    mu_weights: np.ndarray
    boundary_points: np.ndarray
    h_weights: np.ndarray
    boundary_ds: np.ndarray
    boundary_edge: np.ndarray
    dist_to_complement: np.ndarray
    mesh_h: float
    diam: float
    local_h: np.ndarray
    area: float
    region: np.ndarray
    segments: np.ndarray | None = None
    rects: np.ndarray | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        for name in ("interior_points", "mu_weights", "boundary_points", "h_weights",
                     "boundary_ds", "boundary_edge", "dist_to_complement", "local_h", "region"):
            getattr(self, name).setflags(write=False)

    @property
    def n_interior(self) -> int:
        return len(self.interior_points)

    @property
    def n_boundary(self) -> int:
        return len(self.boundary_points)

    @property
    def resolution(self) -> float:
        """Finest sample spacing anywhere in the discretization."""
        return float(min(self.local_h.min(), self.boundary_ds.min()))

    @cached_property
    def interior_tree(self) -> cKDTree:
        return cKDTree(self.interior_points)

    @cached_property
    def boundary_tree(self) -> cKDTree:
        return cKDTree(self.boundary_points)

    def ambient_ball_measure(self, r):
        return math.pi * np.square(r)

    def interior_ball_measure(self, x, r: float) -> float:
        """mu(B(x, r) cap Omega): closed form for rectangle unions, else sample sums."""
        if self.rects is not None:
            return geometry.disc_rects_area(x, r, self.rects)
        idx = self.interior_tree.query_ball_point(x, r)
        return float(self.mu_weights[idx].sum())

    def boundary_ball_measure(self, x, r: float) -> float:
        idx = self.boundary_tree.query_ball_point(x, r)
        return float(self.h_weights[idx].sum())

    def interior_field(self, values):
        from .norms import FieldFn
        return FieldFn(values, self.interior_points, self.mu_weights, "interior", self.local_h)

    def boundary_field(self, values):
        from .norms import FieldFn
        return FieldFn(values, self.boundary_points, self.h_weights, "boundary", self.boundary_ds)

    def boundary_values(self, fn) -> "object":
        """Sample ``fn(x, y)`` on the boundary as a boundary field."""
        p = self.boundary_points
        return self.boundary_field(np.broadcast_to(fn(p[:, 0], p[:, 1]), (self.n_boundary,)).astype(float))

    def interior_values(self, fn):
        p = self.interior_points
        return self.interior_field(np.broadcast_to(fn(p[:, 0], p[:, 1]), (self.n_interior,)).astype(float))


# ---------------------------------------------------------------------------
# construction


def _rect_grid(x0, x1, y0, y1, h):
    nx = max(1, int(round((x1 - x0) / h)))
    ny = max(1, int(round((y1 - y0) / h)))
    hx, hy = (x1 - x0) / nx, (y1 - y0) / ny
    xs = x0 + (np.arange(nx) + 0.5) * hx
    ys = y0 + (np.arange(ny) + 0.5) * hy
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    pts = np.column_stack([X.ravel(), Y.ravel()])
    return pts, np.full(len(pts), hx * hy), max(hx, hy)


def _sample_segments(segments, spacing):
    """Midpoint samples along each segment; returns points, ds, edge ids."""
    pts, ds, eid = [], [], []
    for k, ((ax, ay), (bx, by)) in enumerate(segments):
        length = math.hypot(bx - ax, by - ay)
        s = spacing[k] if np.ndim(spacing) else spacing
        n = max(1, math.ceil(length / s - 1e-9))
        t = (np.arange(n) + 0.5) / n
        pts.append(np.column_stack([ax + t * (bx - ax), ay + t * (by - ay)]))
        ds.append(np.full(n, length / n))
        eid.append(np.full(n, k))
    return np.vstack(pts), np.concatenate(ds), np.concatenate(eid)


def _sample_circle(radius, spacing, edge_id=0):
    n = max(8, math.ceil(2 * math.pi * radius / spacing))
    t = (np.arange(n) + 0.5) * 2 * math.pi / n
    pts = radius * np.column_stack([np.cos(t), np.sin(t)])
    return pts, np.full(n, 2 * math.pi * radius / n), np.full(n, edge_id)


def thin_tube_rects(N: int) -> np.ndarray:
    """Base rectangle followed by tubes U_1..U_N as rows (x0, x1, y0, y1)."""
    rows = [(-1.0, 2.0, -1.0, 0.0)]
    for n in range(1, N + 1):
        c, w, top = 1.0 / n**2, 4.0**-n, 2.0**-n
        rows.append((c - w, c + w, 0.0, top))
    return np.array(rows)


def _thin_tube_segments(rects):
    base, tubes = rects[0], rects[1:]
    segs = [((-1, -1), (-1, 0)), ((-1, -1), (2, -1)), ((2, -1), (2, 0))]
    xs = -1.0
    for x0, x1, _, _ in sorted(map(tuple, tubes)):
        segs.append(((xs, 0.0), (x0, 0.0)))
        xs = x1
    segs.append(((xs, 0.0), (2.0, 0.0)))
    for x0, x1, y0, y1 in tubes:
        segs += [((x0, 0.0), (x0, y1)), ((x0, y1), (x1, y1)), ((x1, y1), (x1, 0.0))]
    return np.array(segs, dtype=float)


def _tube_spacing(segs, rects, h, mode):
    """Sampling spacing per boundary segment and per rectangle."""
    rect_h = np.full(len(rects), h)
    if mode == "exact":
        rect_h[1:] = np.minimum(h, (rects[1:, 1] - rects[1:, 0]) / 4)
    seg_h = np.full(len(segs), h)
    for k, ((ax, ay), (bx, by)) in enumerate(segs):
        if max(ay, by) > 0:  # tube wall or tube top
            mid = ((ax + bx) / 2, (ay + by) / 2)
            for i in range(1, len(rects)):
                x0, x1, _, y1 = rects[i]
                if x0 - 1e-15 <= mid[0] <= x1 + 1e-15 and mid[1] <= y1 + 1e-15:
                    seg_h[k] = rect_h[i]
    return seg_h, rect_h


def build_domain(spec: DomainSpec) -> Discretization:
    """Discretize the domain described by ``spec``.

    Interior samples are cell centres of a uniform grid (of per-rectangle grids
    for thin tubes) weighted by cell area; boundary samples are midpoints of a
    subdivision of each boundary edge at spacing ``h``, with Hausdorff weights
    calibrated edge by edge against :func:`codim1_hausdorff`.
    """
    h = spec.h
    rects = None
    region = None
    if spec.shape in ("unit-square", "l-shape", "custom-polygon"):
        verts = {"unit-square": np.array([[0, 0], [1, 0], [1, 1], [0, 1]], float),
                 "l-shape": L_SHAPE}.get(spec.shape)
        if verts is None:
            verts = np.asarray(spec.vertices, dtype=float)
        segs = geometry.polygon_edges(verts)
        lo, hi = verts.min(axis=0), verts.max(axis=0)
        min_edge = np.min(np.linalg.norm(segs[:, 1] - segs[:, 0], axis=1))
        if h > min_edge / 2:
            raise MeshTooCoarse(f"h={h} cannot resolve an edge of length {min_edge}")
        n = max(2, int(math.ceil((hi - lo).max() / h)))
        if spec.shape == "l-shape":
            n += n % 2
        s = (hi - lo).max() / n
        pts, w, _ = _rect_grid(lo[0], lo[0] + n * s, lo[1], lo[1] + n * s, s)
        keep = geometry.points_in_polygon(pts, verts)
        pts, w = pts[keep], w[keep]
        dist = geometry.segment_distance(pts, segs)
        bpts, bds, beid = _sample_segments(segs, s)
        area = geometry.polygon_area(verts)
        diam = float(np.max(np.linalg.norm(verts[:, None] - verts[None], axis=-1)))
        mesh_h, local = s, np.full(len(pts), s)
    elif spec.shape in ("disc", "slit-disc"):
        if h > 0.25:
            raise MeshTooCoarse(f"h={h} cannot resolve the unit disc")
        n = int(math.ceil(2 / h))
        n += n % 2
        s = 2 / n
        pts, w, _ = _rect_grid(-1, 1, -1, 1, s)
        keep = np.hypot(pts[:, 0], pts[:, 1]) < 1
        pts, w = pts[keep], w[keep]
        dist = 1 - np.hypot(pts[:, 0], pts[:, 1])
        bpts, bds, beid = _sample_circle(1.0, s)
        segs = None
        if spec.shape == "slit-disc":
            slit = np.array([[[0.0, 0.0], [1.0, 0.0]]])
            dist = np.minimum(dist, geometry.segment_distance(pts, slit))
            sp, sds, _ = _sample_segments(slit, s)
            bpts, bds = np.vstack([bpts, sp]), np.concatenate([bds, sds])
            beid = np.concatenate([beid, np.ones(len(sp), dtype=int)])
            segs = slit
        area, diam, mesh_h, local = math.pi, 2.0, s, np.full(len(pts), s)
    else:  # thin tubes
        rects = thin_tube_rects(spec.N)
        segs = _thin_tube_segments(rects)
        seg_h, rect_h = _tube_spacing(segs, rects, h, spec.mode)
        narrowest = (rects[-1, 1] - rects[-1, 0])
        if spec.mode == "grid" and narrowest < 2 * h:
            raise MeshTooCoarse(
                f"tube U_{spec.N} has width {narrowest:.3g} < 2h; use exact mode or a finer h")
        if h > 0.25:
            raise MeshTooCoarse("h must resolve the base rectangle")
        parts, ws, locs, regs = [], [], [], []
        for i, (x0, x1, y0, y1) in enumerate(rects):
            p, wi, hl = _rect_grid(x0, x1, y0, y1, rect_h[i])
            parts.append(p)
            ws.append(wi)
            locs.append(np.full(len(p), hl))
            regs.append(np.full(len(p), i))
        pts, w = np.vstack(parts), np.concatenate(ws)
        local, region = np.concatenate(locs), np.concatenate(regs)
        dist = geometry.segment_distance(pts, segs)
        bpts, bds, beid = _sample_segments(segs, seg_h)
        area = float(np.sum((rects[:, 1] - rects[:, 0]) * (rects[:, 3] - rects[:, 2])))
        diam = math.hypot(3.0, 1.5)
        mesh_h = h
        if spec.mode == "grid":
            rects = None
    if region is None:
        region = np.zeros(len(pts), dtype=int)
    disc = Discretization(
        shape=spec.shape, interior_points=pts, mu_weights=w, boundary_points=bpts,
        h_weights=bds.copy(), boundary_ds=bds, boundary_edge=beid.astype(int),
        dist_to_complement=dist, mesh_h=float(mesh_h), diam=float(diam),
        local_h=local, area=float(area), region=region, segments=segs, rects=rects,
        meta={"spec": spec})
    return _calibrate(disc)


def _calibrate(disc: Discretization) -> Discretization:
    """Rescale boundary weights so each edge carries its covering measure."""
    hw = np.array(disc.boundary_ds, dtype=float)
    for e in np.unique(disc.boundary_edge):
        mask = disc.boundary_edge == e
        s = float(disc.boundary_ds[mask].max())
        value = _greedy_cover_sum(disc, mask, 4 * s)
        hw[mask] *= value / disc.boundary_ds[mask].sum()
    hw.setflags(write=False)
    object.__setattr__(disc, "h_weights", hw)
    return disc


# ---------------------------------------------------------------------------
# measures


def measure_of(disc: Discretization, subset, kind: str = "interior") -> float:
    """Total weight of the masked interior or boundary samples."""
    weights = {"interior": disc.mu_weights, "boundary": disc.h_weights}[kind]
    mask = np.asarray(subset, dtype=bool)
    if mask.shape != weights.shape:
        raise ValueError(f"mask length {mask.size} does not match {weights.size} {kind} points")
    return float(weights[mask].sum())


def dist_to_complement(disc: Discretization, x: int) -> float:
    if not 0 <= x < disc.n_interior:
        raise IndexError(f"interior index {x} out of range")
    return float(disc.dist_to_complement[x])


def _greedy_cover_sum(disc, mask, delta, n_orders: int = 8):
    """Sum of mu(B)/rad(B) over a greedy cover of the masked boundary samples.

    Centres form a greedy delta/2-net; each ball is then shrunk to the smallest
    radius covering the arcs of the samples nearest to it. Every such family is
    an admissible cover, so the minimum over a few start offsets (both
    directions) is kept as the estimate of the infimum.
    """
    idx = np.flatnonzero(mask)
    if idx.size == 0:
        return 0.0
    pts = disc.boundary_points[idx]
    ds = disc.boundary_ds[idx]
    tree = cKDTree(pts)
    base = np.arange(len(pts))
    best = math.inf
    for k in range(min(n_orders, len(pts))):
        for order in (np.roll(base, -k), np.roll(base[::-1], -k)):
            centers = greedy_net_indices(pts, delta / 2, order, tree=tree)
            dist, owner = cKDTree(pts[centers]).query(pts)
            radii = np.zeros(len(centers))
            np.maximum.at(radii, owner, dist + ds / 2)
            best = min(best, math.fsum(disc.ambient_ball_measure(radii) / radii))
    return best


def greedy_net_indices(points: np.ndarray, r: float, order: Sequence[int] | None = None,
                       tree: cKDTree | None = None) -> np.ndarray:
    """Indices of a maximal r-separated subset chosen greedily in ``order``.

    Selected centres are pairwise more than ``r`` apart and every point lies
    within ``r`` of some centre.
    """
    points = np.asarray(points, dtype=float).reshape(-1, 2)
    tree = cKDTree(points) if tree is None else tree
    blocked = np.zeros(len(points), dtype=bool)
    chosen = []
    for i in (range(len(points)) if order is None else order):
        if blocked[i]:
            continue
        chosen.append(i)
        blocked[tree.query_ball_point(points[i], r)] = True
    return np.array(chosen, dtype=int)


def codim1_hausdorff(disc: Discretization, boundary_mask=None, delta_sequence=None):
    """Covering estimate of the co-dimension 1 Hausdorff measure of a boundary subset.

    Returns ``(value, table)`` where table rows are ``(delta, cover_sum, n_balls)``
    and ``value`` is the sum at the smallest delta.
    """
    if boundary_mask is None:
        boundary_mask = np.ones(disc.n_boundary, dtype=bool)
    mask = np.asarray(boundary_mask, dtype=bool)
    if mask.shape != (disc.n_boundary,):
        raise ValueError("boundary mask length mismatch")
    if delta_sequence is None:
        delta_sequence = [disc.mesh_h * 2.0**k for k in (5, 4, 3, 2)]
    deltas = np.asarray(delta_sequence, dtype=float)
    if np.any(np.diff(deltas) >= 0):
        raise ValueError("delta sequence must be strictly decreasing")
    if deltas[-1] < 2 * disc.mesh_h * (1 - 1e-12):
        raise ValueError(f"delta={deltas[-1]} below resolution 2*mesh_h={2 * disc.mesh_h}")
    table = []
    for d in deltas:
        value = _greedy_cover_sum(disc, mask, d)
        n_balls = 0 if not mask.any() else len(greedy_net_indices(disc.boundary_points[mask], d / 2))
        table.append((float(d), value, n_balls))
    return table[-1][1], table


# ---------------------------------------------------------------------------
# regularity audit


@dataclass
class RegularityReport:
    radii: np.ndarray
    boundary_ids: np.ndarray
    interior_ids: np.ndarray
    mu_ball: np.ndarray          # (n_boundary_samples, n_radii), ambient measure
    h_ball: np.ndarray           # H(B(x, r) cap boundary)
    ahlfors_ratio: np.ndarray
    boundary_density: np.ndarray  # mu(B(x, r) cap Omega) / mu(B(x, r)) at boundary samples
    interior_density: np.ndarray  # same at interior samples
    doubling_constant: float
    ahlfors_bounds: tuple
    density_bound: float

    @property
    def ahlfors_min(self) -> float:
        return float(self.ahlfors_ratio.min())

    @property
    def ahlfors_max(self) -> float:
        return float(self.ahlfors_ratio.max())

    @property
    def ahlfors_spread(self) -> float:
        return self.ahlfors_max / self.ahlfors_min

    @property
    def density_min(self) -> float:
        return float(min(self.boundary_density.min(), self.interior_density.min()))

    @property
    def ahlfors_pass(self) -> bool:
        lo, hi = self.ahlfors_bounds
        return lo <= self.ahlfors_min and self.ahlfors_max <= hi

    @property
    def density_pass(self) -> bool:
        return self.density_min >= self.density_bound

    def rows(self):
        """CSV rows (x_id, r, mu_ball, h_ball, ahlfors_ratio, density_ratio)."""
        out = []
        for a, x in enumerate(self.boundary_ids):
            for b, r in enumerate(self.radii):
                out.append((int(x), float(r), float(self.mu_ball[a, b]), float(self.h_ball[a, b]),
                            float(self.ahlfors_ratio[a, b]), float(self.boundary_density[a, b])))
        return out


def regularity_audit(disc: Discretization, radii, n_samples: int = 200, seed: int = 0,
                     ahlfors_bounds=(0.2, 5.0), density_bound: float = 0.2) -> RegularityReport:
    """Sample Ahlfors ratios, density ratios and the doubling constant of mu|Omega.

    Boundary samples are a seeded random subset plus the sample nearest the
    midpoint of every boundary edge; interior samples are a seeded subset plus
    the interior sample nearest to each audited boundary point.
    """
    radii = np.asarray(radii, dtype=float)
    radii = radii[(radii >= 4 * disc.resolution) & (radii <= disc.diam / 2)]
    if radii.size == 0:
        raise ValueError("no radii within [4*resolution, diam/2]")
    rng = np.random.default_rng(seed)
    m = disc.n_boundary
    b_ids = set(rng.choice(m, size=min(n_samples, m), replace=False).tolist())
    for e in np.unique(disc.boundary_edge):
        ids = np.flatnonzero(disc.boundary_edge == e)
        b_ids.add(int(ids[len(ids) // 2]))
    b_ids = np.array(sorted(b_ids))
    _, near = disc.interior_tree.query(disc.boundary_points[b_ids])
    n = disc.n_interior
    i_ids = set(rng.choice(n, size=min(n_samples, n), replace=False).tolist()) | set(near.tolist())
    i_ids = np.array(sorted(i_ids))

    bp = disc.boundary_points[b_ids]
    mu_ball = np.empty((len(b_ids), len(radii)))
    h_ball = np.empty_like(mu_ball)
    bdens = np.empty_like(mu_ball)
    idens = np.empty((len(i_ids), len(radii)))
    doubling = 0.0
    for b, r in enumerate(radii):
        amb = disc.ambient_ball_measure(r)
        mu_ball[:, b] = amb
        for a, idx in enumerate(disc.boundary_tree.query_ball_point(bp, r)):
            h_ball[a, b] = disc.h_weights[idx].sum()
        bdens[:, b] = [disc.interior_ball_measure(x, r) for x in bp] / amb
        inner = np.array([disc.interior_ball_measure(z, r) for z in disc.interior_points[i_ids]])
        idens[:, b] = inner / amb
        outer = np.array([disc.interior_ball_measure(z, 2 * r) for z in disc.interior_points[i_ids]])
        doubling = max(doubling, float(np.max(outer / inner)))
    ratio = h_ball * radii[None, :] / mu_ball
    return RegularityReport(radii, b_ids, i_ids, mu_ball, h_ball, ratio, bdens, idens,
                            doubling, tuple(ahlfors_bounds), density_bound)
