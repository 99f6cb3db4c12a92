"""Function-space energies on weighted point samples.

A :class:`FieldFn` carries values together with the points, weights and local
sample spacing they live on, so every estimator here works on interior
fields, boundary fields and stand-alone curves (e.g. a sampled circle) alike.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree
from scipy.spatial.distance import cdist

from ._neighbors import neighbor_pairs
from .space import greedy_net_indices

_PAIR_BUDGET = 1_500_000  # distance-matrix entries per row chunk


@dataclass(frozen=True, eq=False)
class FieldFn:
    """Real values sampled at weighted points."""

    values: np.ndarray
    points: np.ndarray
    weights: np.ndarray
    domain: str = "boundary"
    spacing: np.ndarray | float | None = None
    info: dict = field(default_factory=dict)

    def __post_init__(self):
        v = np.array(self.values, dtype=float).ravel()
        p = np.asarray(self.points, dtype=float).reshape(-1, 2)
        w = np.asarray(self.weights, dtype=float).ravel()
        if not (len(v) == len(p) == len(w)):
            raise ValueError(f"{len(v)} values for {len(p)} points and {len(w)} weights")
        if not np.all(np.isfinite(v)):
            raise ValueError("field values must be finite")
        if self.domain not in ("interior", "boundary"):
            raise ValueError(f"unknown domain tag {self.domain!r}")
        s = self.spacing
        s = _nn_spacing(p) if s is None else np.broadcast_to(np.asarray(s, dtype=float), v.shape)
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "points", p)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "spacing", s)

    def __len__(self):
        return len(self.values)

    def with_values(self, values) -> "FieldFn":
        return FieldFn(values, self.points, self.weights, self.domain, self.spacing)

    def _other(self, other):
        if isinstance(other, FieldFn):
            if other.points is not self.points and not np.array_equal(other.points, self.points):
                raise ValueError("fields live on different point sets")
            return other.values
        return other

    def __add__(self, other):
        return self.with_values(self.values + self._other(other))

    __radd__ = __add__

    def __sub__(self, other):
        return self.with_values(self.values - self._other(other))

    def __mul__(self, other):
        return self.with_values(self.values * self._other(other))

    __rmul__ = __mul__

    def __neg__(self):
        return self.with_values(-self.values)


def _nn_spacing(points):
    if len(points) < 2:
        return np.ones(len(points))
    d, _ = cKDTree(points).query(points, k=2)
    return d[:, 1]


def min_gap(f: FieldFn) -> float:
    """Smallest positive distance between two sample points."""
    d, _ = cKDTree(f.points).query(f.points, k=2)
    return float(d[:, 1][d[:, 1] > 0].min())


@dataclass(frozen=True)
class NormReport:
    kind: str
    method: str
    params: dict
    value: float
    l1_part: float
    seminorm: float
    table: tuple  # rows (scale, contribution, degenerate_ball_count)

    def to_json(self) -> str:
        return json.dumps({
            "kind": self.kind, "method": self.method, "params": self.params,
            "value": self.value, "l1_part": self.l1_part, "seminorm": self.seminorm,
            "table": [list(r) for r in self.table]}, sort_keys=True)

    def csv_rows(self):
        return [("scale", "contribution", "degenerate_ball_count")] + [tuple(r) for r in self.table]


# ---------------------------------------------------------------------------
# elementary quantities


def l1_norm(f: FieldFn, disc=None, mask=None) -> float:
    a = np.abs(f.values) * f.weights
    if mask is not None:
        a = a[np.asarray(mask, dtype=bool)]
    return math.fsum(a)


def integral_mean(f: FieldFn, mask=None, disc=None) -> float:
    m = np.ones(len(f), dtype=bool) if mask is None else np.asarray(mask, dtype=bool)
    w = f.weights[m]
    total = math.fsum(w)
    if total <= 0:
        raise ValueError("mean over a set of zero weight")
    return math.fsum(f.values[m] * w) / total


def lip_constant(f: FieldFn, mask=None) -> float:
    """Exact max of |f(x) - f(y)| / d(x, y) over distinct masked samples."""
    m = np.ones(len(f), dtype=bool) if mask is None else np.asarray(mask, dtype=bool)
    p, v = f.points[m], f.values[m]
    if len(p) < 2:
        raise ValueError("Lipschitz constant needs at least two points")
    best = 0.0
    step = max(1, _PAIR_BUDGET // len(p))
    for s in range(0, len(p), step):
        d = cdist(p[s:s + step], p)
        dv = np.abs(v[s:s + step, None] - v[None, :])
        with np.errstate(divide="ignore", invalid="ignore"):
            q = np.where(d > 0, dv / d, 0.0)
        best = max(best, float(q.max()))
    return best


def pointwise_lip(u: FieldFn, disc=None, kappa: float = 1.5) -> FieldFn:
    """Largest difference quotient to samples within kappa * local spacing.

    Samples without neighbours get 0 and are listed in ``info["isolated"]``.
    """
    i, j, d = neighbor_pairs(u.points, u.spacing, kappa)
    q = np.abs(u.values[i] - u.values[j]) / d
    out = np.zeros(len(u))
    np.maximum.at(out, i, q)
    np.maximum.at(out, j, q)
    has = np.zeros(len(u), dtype=bool)
    has[i] = has[j] = True
    res = u.with_values(out)
    res.info["isolated"] = np.flatnonzero(~has)
    return res


def bv_energy(u: FieldFn, disc=None, mask=None, kappa: float = 1.5) -> float:
    """Lip-surrogate total variation: integral of pointwise Lip u."""
    return l1_norm(pointwise_lip(u, disc, kappa), mask=mask)


# ---------------------------------------------------------------------------
# Besov and John-Nirenberg energies


def _row_chunks(f: FieldFn, R: float):
    """Per row chunk: sorted distances, cumulative weights and weighted |f(y) - f(x)|."""
    n = len(f)
    step = max(1, _PAIR_BUDGET // n)
    for s in range(0, n, step):
        rows = np.arange(s, min(n, s + step))
        D = cdist(f.points[rows], f.points)
        order = np.argsort(D, axis=1, kind="stable")
        Ds = np.take_along_axis(D, order, axis=1)
        W = f.weights[order]
        A = np.abs(f.values[rows, None] - f.values[order]) * W
        yield rows, Ds, W, A


def default_radius(f: FieldFn, j0: int | None = None) -> float:
    diam = float(cdist(f.points, f.points).max()) if len(f) < 5000 else _bbox_diam(f.points)
    R = 2 * diam
    if j0 is not None:
        R = min(R, 2.0 ** (j0 + 7))
    return R


def _bbox_diam(p):
    return float(np.linalg.norm(p.max(axis=0) - p.min(axis=0)))


def besov_seminorm(f: FieldFn, theta: float, R: float | None = None,
                   method: str = "dyadic", j0: int | None = None) -> NormReport:
    """Besov B^theta_{1,1} energy of a boundary field, by one of three estimators.

    ``dyadic``: sum over t = 2^l <= R of 2^(-l theta) times the mean oscillation
    integral at scale t. ``kernel``: double sum of |f(x) - f(y)| weighted by
    1 / (nu(B(x, d)) d^theta) over pairs closer than R. ``fixed-balls``: greedy
    2^-k nets inflated to radius 2^(1-k), summing rad^-theta int_B |f - f_B|.
    """
    if not 0 <= theta <= 1:
        raise ValueError("theta must lie in [0, 1]")
    if len(f) == 0:
        raise ValueError("empty boundary")
    gap = min_gap(f)
    R = default_radius(f, j0) if R is None else float(R)
    if not 2 * gap < R <= default_radius(f) * (1 + 1e-12):
        raise ValueError(f"R={R} outside (2*min gap, 2*diam]")
    fn = {"dyadic": _besov_dyadic, "kernel": _besov_kernel, "fixed-balls": _besov_balls}.get(method)
    if fn is None:
        raise ValueError(f"unknown Besov method {method!r}")
    table = fn(f, theta, R, gap)
    semi = math.fsum(r[1] for r in table)
    l1 = l1_norm(f)
    return NormReport("besov", method, {"theta": theta, "R": R}, l1 + semi, l1, semi, tuple(table))


def _dyadic_exponents(lo: float, hi: float):
    return range(math.ceil(math.log2(lo) - 1e-12), math.floor(math.log2(hi) + 1e-12) + 1)


def _besov_dyadic(f, theta, R, gap):
    ells = list(_dyadic_exponents(2 * gap, R))
    parts = {l: [] for l in ells}
    degenerate = dict.fromkeys(ells, 0)
    for rows, Ds, W, A in _row_chunks(f, R):
        cw, ca = np.cumsum(W, axis=1), np.cumsum(A, axis=1)
        wx = f.weights[rows]
        for l in ells:
            k = (Ds <= 2.0**l).sum(axis=1)
            idx = (np.arange(len(rows)), k - 1)
            parts[l].append(np.sum(wx * ca[idx] / cw[idx]))
            degenerate[l] += int(np.sum(k <= 1))
    return [(2.0**l, 2.0 ** (-l * theta) * math.fsum(parts[l]), degenerate[l]) for l in ells]


def _besov_kernel(f, theta, R, gap):
    lo = math.floor(math.log2(gap))
    hi = math.ceil(math.log2(R))
    nbins = hi - lo + 1
    parts = [[] for _ in range(nbins)]
    for rows, Ds, W, A in _row_chunks(f, R):
        n = Ds.shape[1]
        cw = np.cumsum(W, axis=1)
        # closed ball nu(B(x, d)): cumulative weight at the end of each tie group
        ends = np.where(np.append(Ds[:, 1:] != Ds[:, :-1], np.ones((len(rows), 1), bool), axis=1),
                        np.arange(n), n)
        last = np.minimum.accumulate(ends[:, ::-1], axis=1)[:, ::-1]
        nu = np.take_along_axis(cw, last, axis=1)
        keep = (Ds > 0) & (Ds < R)
        d = Ds[keep]
        term = f.weights[rows][:, None].repeat(n, axis=1)[keep] * A[keep] / (nu[keep] * d**theta)
        b = np.clip(np.floor(np.log2(d)).astype(int) - lo, 0, nbins - 1)
        sums = np.bincount(b, weights=term, minlength=nbins)
        for i in range(nbins):
            parts[i].append(sums[i])
    return [(2.0 ** (lo + i), math.fsum(parts[i]), 0) for i in range(nbins)]


def _ball_deviation(f, centers, radius, tree=None, block: int = 2_000_000):
    """(integral of |f - f_B| over B, sample count) for closed balls B(c, radius)."""
    centers = np.asarray(centers, dtype=int)
    w, v = f.weights, f.values
    out, counts = np.empty(len(centers)), np.empty(len(centers), dtype=int)
    step = max(1, block // max(len(f), 1))
    for s in range(0, len(centers), step):
        c = centers[s:s + step]
        inside = cdist(f.points[c], f.points) <= radius
        wm = inside * w
        mean = (wm @ v) / wm.sum(axis=1)
        out[s:s + step] = np.sum(wm * np.abs(v[None, :] - mean[:, None]), axis=1)
        counts[s:s + step] = inside.sum(axis=1)
    return out, counts


def _besov_balls(f, theta, R, gap):
    tree = cKDTree(f.points)
    rows = []
    for l in _dyadic_exponents(gap, R / 2):
        r = 2.0**l
        centers = greedy_net_indices(f.points, r, tree=tree)
        dev, counts = _ball_deviation(f, centers, 2 * r, tree)
        rows.append((2 * r, (2 * r) ** (-theta) * math.fsum(dev), int(np.sum(counts <= 1))))
    return rows[::-1]


def jn_norm(f: FieldFn, theta: float, tau: float = 1.0, R: float | None = None,
            restarts: int = 32, seed: int = 0) -> NormReport:
    """John-Nirenberg A^theta_{1,tau} norm, supremum estimated from below.

    For each dyadic radius r <= R / tau, packings of balls whose tau-dilates are
    pairwise disjoint are built greedily (one oscillation-ranked order plus
    ``restarts`` seeded random orders); the best packing sum over all radii is
    added to the L1 norm.
    """
    if not 0 <= theta <= 1 or tau < 1:
        raise ValueError("need theta in [0, 1] and tau >= 1")
    gap = min_gap(f)
    R = default_radius(f) if R is None else float(R)
    tree = cKDTree(f.points)
    rng = np.random.default_rng(seed)
    n = len(f)
    table = []
    for l in _dyadic_exponents(gap, R / tau):
        r = 2.0**l
        dev, counts = _ball_deviation(f, np.arange(n), tau * r, tree)
        score = r ** (-theta) * dev
        orders = [np.argsort(-score, kind="stable")] + [rng.permutation(n) for _ in range(restarts)]
        near = tree.query_ball_point(f.points, 2 * tau * r)
        best = 0.0
        for order in orders:
            blocked = bytearray(n)   # plain Python containers: this loop is the hot path
            picked = []
            for c in order.tolist():
                if blocked[c]:
                    continue
                picked.append(c)
                for j in near[c]:
                    blocked[j] = 1
            best = max(best, math.fsum(score[picked]))
        table.append((r, best, int(np.sum(counts <= 1))))
    sup = max((row[1] for row in table), default=0.0)
    l1 = l1_norm(f)
    return NormReport("jn", "greedy-packing", {"theta": theta, "tau": tau, "R": R, "restarts": restarts,
                                                "seed": seed}, l1 + sup, l1, sup, tuple(table))
