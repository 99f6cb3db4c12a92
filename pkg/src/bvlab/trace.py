"""Shrinking-ball traces of interior fields at boundary samples."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .norms import FieldFn
from .space import Discretization

N_MIN = 20


class Unresolvable(ValueError):
    """No radius in the schedule gives a ball with enough interior samples."""


@dataclass(frozen=True)
class TraceResult:
    z: int
    Tu: float
    radii: np.ndarray        # admissible radii, decreasing
    residuals: np.ndarray    # mean of |u - Tu| over B(z, r) cap Omega
    slope: float             # log-log decay slope over all admissible radii
    converged: bool
    tolerance: float

    @property
    def final_residual(self) -> float:
        return float(self.residuals[-1])

    @property
    def r_min(self) -> float:
        return float(self.radii[-1])


def radius_schedule(disc: Discretization, r_min: float | None = None, levels: int = 30) -> np.ndarray:
    """r_m = (diam / 10) 2^-m, down to ``r_min`` when given."""
    r = disc.diam / 10 * 2.0 ** -np.arange(levels)
    if r_min is not None:
        r = r[r >= r_min * (1 - 1e-12)]
    return r


def _ball(disc, z, r):
    idx = np.asarray(disc.interior_tree.query_ball_point(disc.boundary_points[z], r), dtype=int)
    d = np.linalg.norm(disc.interior_points[idx] - disc.boundary_points[z], axis=1)
    return idx[d < r]


def _decay_slope(r, e):
    if len(r) < 2 or np.any(e <= 0):
        return float("nan")
    return float(np.polyfit(np.log(r), np.log(e), 1)[0])


def trace_tolerance(osc: float, disc: Discretization) -> float:
    return max(0.05 * osc, 10 * osc * disc.mesh_h / disc.diam)


def trace_at(u: FieldFn, disc: Discretization, z: int, radii=None, n_min: int = N_MIN,
             osc: float | None = None) -> TraceResult:
    """Mean of u over the smallest admissible ball B(z, r) cap Omega, with residuals.

    A radius is admissible when its ball holds at least ``n_min`` interior
    samples. Convergence means the residuals are nonincreasing over the finest
    three admissible radii and the last one is within tolerance.
    """
    radii = radius_schedule(disc) if radii is None else np.asarray(radii, dtype=float)
    if np.any(np.diff(radii) >= 0):
        raise ValueError("radii must be strictly decreasing")
    balls = []
    for r in radii:
        idx = _ball(disc, z, r)
        if len(idx) < n_min:
            break
        balls.append((r, idx))
    if not balls:
        raise Unresolvable(f"boundary sample {z} has no admissible ball")
    w, v = u.weights, u.values
    idx = balls[-1][1]
    Tu = math.fsum(w[idx] * v[idx]) / math.fsum(w[idx])
    res = np.array([math.fsum(w[i] * np.abs(v[i] - Tu)) / math.fsum(w[i]) for _, i in balls])
    rr = np.array([r for r, _ in balls])
    osc = float(np.ptp(v)) if osc is None else osc
    noise = 64 * np.finfo(float).eps * float(np.max(np.abs(v[balls[0][1]])))  # rounding floor
    tol = max(trace_tolerance(osc, disc), noise)
    tail = res[-3:]
    converged = bool(np.all(np.diff(tail) <= noise) and res[-1] <= tol)
    return TraceResult(int(z), float(Tu), rr, res, _decay_slope(rr, res), converged, tol)


@dataclass(frozen=True)
class TraceReport:
    rows: tuple               # (z_id, Tu, final_residual, slope, converged, is_jump_neighbor)
    errors: np.ndarray        # |T F(z) - f(z)| at resolved samples
    oscillation: np.ndarray   # mean of |f - f(z)| over B(z, 2^7 r_min) on the boundary
    unresolved: tuple
    r_min: float
    mesh_floor: float
    row_r_min: np.ndarray = None   # finest admissible radius used at each row
    meta: dict = field(default_factory=dict)

    def errors_at_floor(self) -> np.ndarray:
        """Errors at samples whose finest admissible radius is the schedule floor."""
        return self.errors[np.isclose(self.row_r_min, self.r_min, rtol=1e-12)]

    @property
    def max_error(self) -> float:
        return float(self.errors.max(initial=0.0))

    @property
    def fraction_converged(self) -> float:
        return float(np.mean([r[4] for r in self.rows])) if self.rows else 0.0

    @property
    def failures(self):
        return [r for r in self.rows if not r[4]]

    def oscillation_constant(self) -> float:
        """Smallest C with error <= C * oscillation + mesh floor at every sample."""
        excess = np.maximum(self.errors - self.mesh_floor, 0.0)
        with np.errstate(divide="ignore", invalid="ignore"):
            c = np.where(excess > 0, excess / self.oscillation, 0.0)
        return float(c.max(initial=0.0))

    def csv_rows(self):
        return [("z_id", "Tu", "final_residual", "slope", "converged", "is_jump_neighbor")] + list(self.rows)


def jump_points(f: FieldFn, disc: Discretization, kappa: float = 1.5) -> np.ndarray:
    """Midpoints of neighbouring boundary samples across which f jumps by more than osc/4."""
    from ._neighbors import neighbor_pairs

    i, j, _ = neighbor_pairs(f.points, f.spacing, kappa)
    jump = np.abs(f.values[i] - f.values[j]) > np.ptp(f.values) / 4
    return 0.5 * (f.points[i[jump]] + f.points[j[jump]])


def trace_identity_report(f: FieldFn, result, disc: Discretization, sample_size: int = 64,
                          seed: int = 0, r_min: float | None = None, n_min: int = N_MIN,
                          jumps=None, jump_radius: float | None = None) -> TraceReport:
    """Compare the trace of an extension with its boundary data on seeded samples."""
    rng = np.random.default_rng(seed)
    zs = np.sort(rng.choice(disc.n_boundary, size=min(sample_size, disc.n_boundary), replace=False))
    if r_min is None:  # a boundary half ball of this radius holds about n_min samples
        r_min = math.sqrt(2 * n_min / math.pi) * disc.mesh_h
    radii = radius_schedule(disc, r_min)
    r_floor = float(radii[-1])
    jumps = jump_points(f, disc) if jumps is None else np.asarray(jumps, dtype=float).reshape(-1, 2)
    jr = 2.0**7 * r_floor if jump_radius is None else jump_radius
    osc = float(np.ptp(f.values))
    floor = 10 * osc * disc.mesh_h / disc.diam
    rows, errors, oscs, unresolved, used = [], [], [], [], []
    for z in zs:
        try:
            t = trace_at(result.F, disc, int(z), radii, n_min, osc)
        except Unresolvable:
            unresolved.append(int(z))
            continue
        near = bool(len(jumps) and np.min(np.linalg.norm(jumps - disc.boundary_points[z], axis=1)) <= jr)
        rows.append((int(z), t.Tu, t.final_residual, t.slope, t.converged, near))
        errors.append(abs(t.Tu - f.values[z]))
        used.append(t.r_min)
        idx = disc.boundary_tree.query_ball_point(disc.boundary_points[z], 2.0**7 * t.r_min)
        w = f.weights[idx]
        oscs.append(math.fsum(w * np.abs(f.values[idx] - f.values[z])) / math.fsum(w))
    return TraceReport(tuple(rows), np.array(errors), np.array(oscs), tuple(unresolved),
                       r_floor, floor, np.array(used), {"sample": zs.tolist(), "jump_radius": jr})
