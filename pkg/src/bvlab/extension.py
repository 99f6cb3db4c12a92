"""Boundary-to-interior extensions.

``extend_besov`` is the linear Whitney extension: every Whitney ball gets the
boundary average of f over its shadow and F is the partition-of-unity blend of
those averages. ``extend_l1`` glues linear extensions of ever finer Lipschitz
approximations of f on ever thinner collars of the boundary.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial.distance import cdist

from .cover import PartitionOfUnity, WhitneyCover, boundary_shadows, layer, partition_of_unity, whitney_cover
from .norms import FieldFn, l1_norm, lip_constant, pointwise_lip
from .space import Discretization

BISECTION_STEPS = 60
BRACKET_DECADES = 12.0


@dataclass(frozen=True, eq=False)
class LayerSchedule:
    """Lipschitz stages f_1 = 0, f_2, ..., f_K with collar radii rho_1 > ... > rho_K."""

    stages: tuple          # FieldFn on the boundary, f_1 ... f_K
    rho: np.ndarray        # rho_1 ... rho_K
    lips: np.ndarray       # certified LIP(f_k), k = 1 ... K
    l1_err: np.ndarray     # ||f_k - f||_L1
    f_norm: float
    stop_reason: str
    psi: tuple = ()        # psi_1 ... psi_{K-1} on interior samples

    @property
    def K(self) -> int:
        return len(self.stages)

    def stage_gaps(self) -> np.ndarray:
        """||f_{k+1} - f_k||_L1 for k = 1 ... K-1."""
        return np.array([l1_norm(self.stages[k] - self.stages[k - 1]) for k in range(1, self.K)])

    def gap_bounds(self) -> np.ndarray:
        return np.array([2.0 ** (2 - k) * self.f_norm for k in range(1, self.K)])

    def lip_sum(self) -> float:
        """Sum over k of rho_k LIP(f_{k+1})."""
        return math.fsum(self.rho[:-1] * self.lips[1:])

    def truncation_error(self) -> float:
        return float(self.rho[-1] * self.l1_err[-1])

    def check(self, tol: float = 1e-12) -> dict:
        scale = max(self.f_norm, 1.0)
        return {
            "stage_decay": bool(np.all(self.stage_gaps() <= self.gap_bounds() + tol * scale)),
            "rho_halving": bool(np.all(self.rho[1:] <= self.rho[:-1] / 2 * (1 + tol)) and np.all(self.rho > 0)),
            "lip_sum": self.lip_sum() <= 2 * self.f_norm + tol * scale,
        }

    def rows(self):
        return [{"k": k + 1, "rho_k": float(self.rho[k]), "lip_fk": float(self.lips[k]),
                 "l1_err_k": float(self.l1_err[k])} for k in range(self.K)]

    def to_json(self) -> str:
        return json.dumps(self.rows())


@dataclass(frozen=True, eq=False)
class ExtensionResult:
    F: FieldFn
    lipF: FieldFn
    provenance: str
    coefficients: np.ndarray | None = None
    schedule: LayerSchedule | None = None
    stage_extensions: tuple = ()
    meta: dict = field(default_factory=dict)

    def csv_rows(self):
        p = self.F.points
        out = [("x", "y", "F", "LipF")]
        out += [(float(a), float(b), float(c), float(d))
                for (a, b), c, d in zip(p, self.F.values, self.lipF.values)]
        return out


def _ensure_cover(disc, cover, pou):
    if cover is None:
        cover = boundary_shadows(whitney_cover(disc), disc)
    if pou is None:
        pou = partition_of_unity(cover, disc)
    return cover, pou


def shadow_means(f: FieldFn, cover: WhitneyCover) -> np.ndarray:
    """Average of f over each shadow U with respect to the boundary weights."""
    if not cover.has_shadows:
        raise ValueError("cover has no boundary shadows; run boundary_shadows first")
    mass = cover.U @ f.weights
    if np.any(mass <= 0):
        raise ValueError("empty shadow encountered")
    return (cover.U @ (f.weights * f.values)) / mass


def extend_besov(f: FieldFn, cover: WhitneyCover | None = None, pou: PartitionOfUnity | None = None,
                 disc: Discretization | None = None, with_lip: bool = True) -> ExtensionResult:
    """Linear Whitney extension F = sum_b a_b phi_b with a_b the shadow mean of f."""
    if cover is None or pou is None:
        cover, pou = _ensure_cover(disc, cover, pou)
    a = shadow_means(f, cover)
    values = pou(a)
    F = FieldFn(values, disc.interior_points, disc.mu_weights, "interior", disc.local_h)
    lipF = pointwise_lip(F) if with_lip else F.with_values(np.zeros(len(F)))
    return ExtensionResult(F, lipF, "besov", coefficients=a)


def layer_energy(result: ExtensionResult, rho1: float, rho2: float, disc: Discretization):
    """(integral of Lip F, integral of |F|) over the collar rho1 <= dist < rho2."""
    mask = layer(disc, rho1, rho2)
    return l1_norm(result.lipF, mask=mask), l1_norm(result.F, mask=mask)


# ---------------------------------------------------------------------------
# Lipschitz approximation


class _Envelope:
    """Inf/sup convolutions of boundary samples, reusing one distance matrix."""

    def __init__(self, f: FieldFn):
        self.f = f
        self.D = cdist(f.points, f.points)

    def __call__(self, L: float):
        v = self.f.values
        lower = np.min(v[None, :] + L * self.D, axis=1)
        upper = np.max(v[None, :] - L * self.D, axis=1)
        return lower, upper

    def gap(self, L: float) -> float:
        lower, upper = self(L)
        return math.fsum(0.5 * (upper - lower) * self.f.weights)


def lipschitz_approximation(f: FieldFn, target: float, envelope: _Envelope | None = None):
    """Lipschitz g with ||f - g||_L1 <= target, and a certified bound on LIP(g).

    g = (g_L + h_L) / 2 where g_L and h_L are the inf- and sup-convolutions of f
    with slope L. Since g_L <= f <= h_L, the error is at most ||(h_L - g_L)/2||_L1,
    which decreases in L; the smallest admissible L is located by a fixed
    bisection in log L, so the returned constant is monotone in ``target``.
    When L reaches LIP(f) both convolutions equal f and g = f.
    """
    if not target > 0:
        raise ValueError("target error must be positive")
    if len(f) == 0:
        raise ValueError("empty boundary")
    lip_f = lip_constant(f) if len(f) > 1 else 0.0
    if lip_f == 0.0:
        return f.with_values(f.values.copy()), 0.0
    env = _Envelope(f) if envelope is None else envelope
    lo, hi = math.log(lip_f) - BRACKET_DECADES * math.log(10), math.log(lip_f)
    if env.gap(math.exp(lo)) <= target:
        hi = lo
    else:
        for _ in range(BISECTION_STEPS):
            mid = 0.5 * (lo + hi)
            if env.gap(math.exp(mid)) <= target:
                hi = mid
            else:
                lo = mid
    L = math.exp(hi)
    if L >= lip_f:
        return f.with_values(f.values.copy()), lip_f
    lower, upper = env(L)
    return f.with_values(0.5 * (lower + upper)), L


def build_schedule(f: FieldFn, disc: Discretization, K_max: int = 20, tol: float = 0.0) -> LayerSchedule:
    """Stages f_{k+1} approximating f to 2^-k ||f|| with radii
    rho_k = min(rho_{k-1}/2, 2^-k ||f|| / (1 + LIP(f_{k+1}))), rho_1 <= diam/4.

    Stops at K_max, when 2^(2-K) ||f|| < tol, or when the next collar
    rho_k - rho_{k+1} would be thinner than the mesh.
    """
    if K_max < 2:
        raise ValueError("K_max must be at least 2")
    nf = l1_norm(f)
    zero = f.with_values(np.zeros(len(f)))
    if nf == 0:
        rho1 = disc.diam / 4
        return LayerSchedule((zero, zero), np.array([rho1, rho1 / 2]), np.zeros(2),
                             np.zeros(2), 0.0, "zero data")
    env = _Envelope(f)
    # pairs (rho_k, f_{k+1}); the last approximation only serves to fix rho_K
    stages, lips, errs, rho = [zero], [0.0], [nf], []
    reason = "K_max"
    k = 1
    while True:
        g, L = lipschitz_approximation(f, 2.0 ** (-k) * nf, env)
        r = 2.0 ** (-k) * nf / (1 + L)
        r = min(r, disc.diam / 4) if k == 1 else min(r, rho[-1] / 2)
        if k > 1 and rho[-1] - r < disc.mesh_h:
            reason = "collar below mesh"
            if k == 2:
                rho.append(r)  # K = 2 still needs rho_2 for psi_1
            else:  # f_k has no collar of its own: drop it
                stages.pop()
                lips.pop()
                errs.pop()
            break
        rho.append(r)
        if len(rho) == K_max:
            break
        stages.append(g)
        lips.append(L)
        errs.append(l1_norm(g - f))
        if tol > 0 and 2.0 ** (2 - len(stages)) * nf < tol:
            reason = "tolerance"
            rho.append(min(rho[-1] / 2, 2.0 ** (-k - 1) * nf / (1 + L)))
            break
        k += 1
    rho = np.array(rho)
    return LayerSchedule(tuple(stages), rho, np.array(lips), np.array(errs), nf, reason)


def cutoffs(schedule: LayerSchedule, disc: Discretization) -> tuple:
    """psi_k = clip((rho_k - dist) / (rho_k - rho_{k+1}), 0, 1), k = 1 ... K-1."""
    d = disc.dist_to_complement
    rho = schedule.rho
    return tuple(np.clip((rho[k] - d) / (rho[k] - rho[k + 1]), 0.0, 1.0) for k in range(schedule.K - 1))


def glue(schedule: LayerSchedule, extensions, psi) -> np.ndarray:
    """sum_{k=2}^{K-1} (psi_{k-1} - psi_k) Ef_k + psi_{K-1} Ef_K (1-based stages)."""
    K = schedule.K
    F = psi[K - 2] * extensions[K - 1]
    for k in range(K - 2, 0, -1):  # 0-based stage index k is stage k+1
        F = F + (psi[k - 1] - psi[k]) * extensions[k]
    return F


def extend_l1(f: FieldFn, disc: Discretization, K_max: int = 20, cover: WhitneyCover | None = None,
              pou: PartitionOfUnity | None = None, schedule: LayerSchedule | None = None,
              tol: float = 0.0) -> ExtensionResult:
    """Layered extension of L1 boundary data (nonlinear in f).

    The result vanishes where dist >= rho_1, equals Ef_K where dist <= rho_K and
    blends consecutive stages on each collar rho_{k+1} < dist < rho_k.
    """
    cover, pou = _ensure_cover(disc, cover, pou)
    if schedule is None:
        schedule = build_schedule(f, disc, K_max, tol)
    psi = cutoffs(schedule, disc)
    exts = [np.zeros(disc.n_interior)] + [pou(shadow_means(g, cover)) for g in schedule.stages[1:]]
    values = glue(schedule, exts, psi)
    F = FieldFn(values, disc.interior_points, disc.mu_weights, "interior", disc.local_h)
    sched = LayerSchedule(schedule.stages, schedule.rho, schedule.lips, schedule.l1_err,
                          schedule.f_norm, schedule.stop_reason, psi)
    return ExtensionResult(F, pointwise_lip(F), "l1-layered", schedule=sched,
                           stage_extensions=tuple(exts))
