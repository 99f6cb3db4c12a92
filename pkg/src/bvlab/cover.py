"""Whitney covers, partitions of unity, greedy nets and boundary shadows."""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field, replace

import numpy as np
import scipy.sparse as sp
from scipy.spatial import cKDTree

from ._neighbors import neighbor_pairs
from .space import Discretization, greedy_net_indices

log = logging.getLogger(__name__)

SHADOW_DILATION = 2.0**6


class EmptyShadow(RuntimeError):
    pass


class UncoveredSample(RuntimeError):
    pass


@dataclass(frozen=True)
class WhitneyBall:
    center: tuple
    radius: float
    level: int
    q: tuple | None
    shadow: np.ndarray | None        # boundary indices of U
    shadow_star: np.ndarray | None   # boundary indices of U*


@dataclass(frozen=True, eq=False)
class WhitneyCover:
    """Leveled Whitney balls over the interior samples of a discretization.

    Ball ``b`` is centred at interior sample ``center_idx[b]`` with radius
    ``radii[b]`` and level ``levels[b]``. The sparse ``tents`` matrix holds the
    tent values ``clip(2 - d(x, p)/r, 0, 1)`` for every (sample, ball) pair with
    ``d(x, p) < 2r``; ``dists`` holds the matching distances.
    """

    center_idx: np.ndarray
    centers: np.ndarray
    radii: np.ndarray
    levels: np.ndarray
    tents: sp.csr_matrix
    dists: sp.csr_matrix
    overlap: int
    q_idx: np.ndarray | None = None
    U: sp.csr_matrix | None = None
    U_star: sp.csr_matrix | None = None
    dropped: tuple = ()
    meta: dict = field(default_factory=dict)

    @property
    def n_balls(self) -> int:
        return len(self.radii)

    @property
    def j0(self) -> int:
        return int(self.levels.max())

    @property
    def has_shadows(self) -> bool:
        return self.U is not None

    def ball(self, b: int) -> WhitneyBall:
        q = None
        U = Us = None
        if self.has_shadows:
            q = tuple(self.meta["boundary_points"][self.q_idx[b]])
            U = self.U[b].indices
            Us = self.U_star[b].indices
        return WhitneyBall(tuple(self.centers[b]), float(self.radii[b]), int(self.levels[b]), q, U, Us)

    @property
    def balls(self):
        return [self.ball(b) for b in range(self.n_balls)]

    def covered(self) -> np.ndarray:
        """Mask of interior samples lying in some open ball B(p, r)."""
        d = self.dists.tocoo()
        inside = d.data < self.radii[d.col]
        out = np.zeros(self.dists.shape[0], dtype=bool)
        out[d.row[inside]] = True
        # a sample at distance 0 from a centre is stored as an explicit entry
        out[self.center_idx] = True
        return out

    def coverage_fraction(self) -> float:
        return float(self.covered().mean())

    def to_json(self) -> str:
        rows = []
        bp = self.meta.get("boundary_points")
        for b in range(self.n_balls):
            q = None if self.q_idx is None else [float(v) for v in bp[self.q_idx[b]]]
            rows.append({"p": [float(v) for v in self.centers[b]], "r": float(self.radii[b]),
                         "j": int(self.levels[b]), "q": q})
        return json.dumps(rows)

    def report_rows(self):
        """(level, count, max_overlap, dropped) per level."""
        rows = []
        t = self.tents.tocsc()
        dropped_levels = [lvl for lvl, _ in self.dropped]
        for j in np.unique(self.levels):
            cols = np.flatnonzero(self.levels == j)
            per_sample = np.diff(t[:, cols].tocsr().indptr)
            rows.append((int(j), int(len(cols)), int(per_sample.max(initial=0)),
                         int(dropped_levels.count(int(j)))))
        return rows


def dyadic_level(r) -> np.ndarray:
    """Integer j with 2^(j-1) < r <= 2^j, computed exactly."""
    m, e = np.frexp(np.asarray(r, dtype=float))
    return np.where(m == 0.5, e - 1, e).astype(int)


def whitney_cover(disc: Discretization) -> WhitneyCover:
    """Whitney balls with radius dist(p, complement)/8, greedy per dyadic level.

    Within each level the centres are picked in lexicographic point order as
    a maximal 2^(j-1)-separated subset of the samples of that level.
    """
    if disc.n_interior == 0:
        raise ValueError("discretization has no interior points")
    pts = disc.interior_points
    r_all = disc.dist_to_complement / 8
    lev_all = dyadic_level(r_all)
    order = np.lexsort((pts[:, 1], pts[:, 0]))
    chosen = []
    for j in np.unique(lev_all):
        members = order[lev_all[order] == j]
        local = greedy_net_indices(pts[members], 2.0 ** (j - 1))
        chosen.append(members[local])
    center_idx = np.sort(np.concatenate(chosen))
    centers = pts[center_idx]
    radii = r_all[center_idx]
    levels = lev_all[center_idx]

    hits = disc.interior_tree.query_ball_point(centers, 2 * radii)
    cols = np.repeat(np.arange(len(center_idx)), [len(h) for h in hits])
    rows = np.concatenate([np.asarray(h, dtype=int) for h in hits])
    d = np.linalg.norm(pts[rows] - centers[cols], axis=1)
    keep = d < 2 * radii[cols]
    rows, cols, d = rows[keep], cols[keep], d[keep]
    tent = np.clip(2 - d / radii[cols], 0.0, 1.0)
    shape = (disc.n_interior, len(center_idx))
    tents = sp.csr_matrix((tent, (rows, cols)), shape=shape)
    dists = sp.csr_matrix((d, (rows, cols)), shape=shape)
    overlap = int(np.diff(tents.indptr).max())
    return WhitneyCover(center_idx, centers, radii, levels, tents, dists, overlap,
                        meta={"boundary_points": disc.boundary_points, "n_interior": disc.n_interior})


def level_separation_violations(cover: WhitneyCover) -> int:
    """Number of (level j, level j+2) ball pairs whose closures meet."""
    bad = 0
    levels = np.unique(cover.levels)
    trees = {j: cKDTree(cover.centers[cover.levels == j]) for j in levels}
    for j in levels:
        if j + 2 not in trees:
            continue
        lo = np.flatnonzero(cover.levels == j)
        hi = np.flatnonzero(cover.levels == j + 2)
        reach = cover.radii[lo] + cover.radii[hi].max()
        for a, cand in zip(lo, trees[j + 2].query_ball_point(cover.centers[lo], reach)):
            if not cand:
                continue
            b = hi[cand]
            gap = np.linalg.norm(cover.centers[b] - cover.centers[a], axis=1)
            bad += int(np.sum(gap <= cover.radii[a] + cover.radii[b]))
    return bad


def boundary_shadows(cover: WhitneyCover, disc: Discretization) -> WhitneyCover:
    """Attach the nearest boundary sample q and the shadows U, U* to every ball.

    U = B(q, r) and U* = B(q, 64 r) intersected with the boundary samples. Ties
    for q go to the lowest boundary index. Balls with an empty shadow are
    removed and listed in ``dropped`` as (level, centre index).
    """
    k = min(8, disc.n_boundary)
    dq, iq = disc.boundary_tree.query(cover.centers, k=k)
    dq, iq = dq.reshape(len(cover.centers), -1), iq.reshape(len(cover.centers), -1)
    tie = dq <= dq[:, :1] * (1 + 1e-12) + 1e-15
    q_idx = np.where(tie, iq, np.iinfo(int).max).min(axis=1)
    q = disc.boundary_points[q_idx]

    def shadow(scale):
        hits = disc.boundary_tree.query_ball_point(q, scale * cover.radii)
        rows = np.repeat(np.arange(cover.n_balls), [len(h) for h in hits])
        cols = np.concatenate([np.asarray(h, dtype=int) for h in hits])
        d = np.linalg.norm(disc.boundary_points[cols] - q[rows], axis=1)
        keep = d < scale * cover.radii[rows]
        return sp.csr_matrix((np.ones(int(keep.sum())), (rows[keep], cols[keep])),
                             shape=(cover.n_balls, disc.n_boundary))

    U, Us = shadow(1.0), shadow(SHADOW_DILATION)
    empty = np.diff(U.indptr) == 0
    dropped = tuple((int(cover.levels[b]), int(cover.center_idx[b])) for b in np.flatnonzero(empty))
    if dropped:
        log.warning("dropping %d Whitney balls with empty boundary shadow", len(dropped))
        keep = np.flatnonzero(~empty)
        cover = replace(cover, center_idx=cover.center_idx[keep], centers=cover.centers[keep],
                        radii=cover.radii[keep], levels=cover.levels[keep],
                        tents=cover.tents[:, keep], dists=cover.dists[:, keep])
        U, Us, q_idx = U[keep], Us[keep], q_idx[keep]
    return replace(cover, q_idx=q_idx, U=U, U_star=Us, dropped=cover.dropped + dropped)


@dataclass(frozen=True, eq=False)
class PartitionOfUnity:
    """Normalized tent functions: ``phi[x, b]`` is the weight of ball b at sample x."""

    phi: sp.csr_matrix
    lip: np.ndarray       # sampled Lipschitz quotient of each phi_b
    radii: np.ndarray

    @property
    def lipschitz_constant(self) -> float:
        """Smallest C0 with lip_b <= C0 / r_b for all balls."""
        return float(np.max(self.lip * self.radii, initial=0.0))

    def __call__(self, coefficients) -> np.ndarray:
        return self.phi @ np.asarray(coefficients, dtype=float)


def partition_of_unity(cover: WhitneyCover, disc: Discretization, kappa: float = 1.5) -> PartitionOfUnity:
    """Tents ``clip(2 - d/r, 0, 1)`` normalized by their sum at each sample."""
    total = np.asarray(cover.tents.sum(axis=1)).ravel()
    if np.any(total <= 0):
        bad = int(np.flatnonzero(total <= 0)[0])
        raise UncoveredSample(f"interior sample {bad} lies in no Whitney ball")
    phi = sp.csr_matrix(sp.diags(1.0 / total) @ cover.tents)
    i, j, d = neighbor_pairs(disc.interior_points, disc.local_h, kappa, tree=disc.interior_tree)
    lip = np.zeros(cover.n_balls)
    for start in range(0, len(i), 200_000):
        sl = slice(start, start + 200_000)
        diff = abs(phi[i[sl]] - phi[j[sl]])
        diff = sp.diags(1.0 / d[sl]) @ diff
        lip = np.maximum(lip, diff.max(axis=0).toarray().ravel())
    return PartitionOfUnity(phi, lip, cover.radii.copy())


def greedy_net(points, r: float, tau: float = 3.0):
    """Greedy r-separated centres whose tau*r balls cover ``points``.

    Returns ``(center_indices, overlap)`` where overlap is the largest number of
    tau*r balls containing a single input point.
    """
    if r <= 0:
        raise ValueError("net radius must be positive")
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    centers = greedy_net_indices(pts, r)
    counts = cKDTree(pts[centers]).query_ball_point(pts, tau * r, return_length=True)
    return centers, int(np.max(counts, initial=0))


def layer(disc: Discretization, rho1: float, rho2: float) -> np.ndarray:
    """Mask of interior samples with rho1 <= dist(x, complement) < rho2."""
    if not (0 <= rho1 < rho2 <= disc.diam / 2):
        raise ValueError(f"invalid layer range [{rho1}, {rho2})")
    d = disc.dist_to_complement
    return (d >= rho1) & (d < rho2)
