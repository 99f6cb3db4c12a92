"""Boundary data, circle test functions and closed-form reference values."""

from __future__ import annotations

import math
from fractions import Fraction

import numpy as np

from .norms import FieldFn
from .space import Discretization, thin_tube_rects

# ---------------------------------------------------------------------------
# boundary fixtures: every fixture is a function of (x, y), so the same data
# is sampled consistently at every mesh


def _bbox(disc):
    p = disc.boundary_points
    return p.min(axis=0), p.max(axis=0)


def linear(a, b, c=0.0):
    return lambda x, y: a * x + b * y + c


def anchored_lipschitz(anchors, values, L):
    """min_k (v_k + L |p - a_k|): an inf-convolution of anchor noise."""
    anchors = np.asarray(anchors, dtype=float)
    values = np.asarray(values, dtype=float)

    def fn(x, y):
        d = np.hypot(x[:, None] - anchors[:, 0], y[:, None] - anchors[:, 1])
        return np.min(values + L * d, axis=1)
    return fn


def half_plane(nx, ny, t):
    return lambda x, y: (nx * x + ny * y > t).astype(float)


def disc_indicator(cx, cy, r):
    return lambda x, y: (np.hypot(x - cx, y - cy) < r).astype(float)


def angular_wave(cx, cy, m, phase=0.0):
    return lambda x, y: np.sin(m * np.arctan2(y - cy, x - cx) + phase)


def fixture_family(disc: Discretization, n: int = 20, seed: int = 0):
    """Seeded mix of Lipschitz, step and oscillatory boundary data.

    Returns a list of (name, FieldFn). The first quarter are linear, then
    anchored Lipschitz functions, half-plane steps, disc indicators (arcs) and
    angular waves.
    """
    rng = np.random.default_rng(seed)
    lo, hi = _bbox(disc)
    mid = (lo + hi) / 2
    span = float(np.max(hi - lo))
    makers = []
    for i in range(n):
        kind = ("linear", "lipschitz", "step", "arc", "wave")[i % 5]
        if kind == "linear":
            a, b, c = rng.uniform(-1, 1, 3)
            fn = linear(a, b, c)
        elif kind == "lipschitz":
            anchors = rng.uniform(lo, hi, (6, 2))
            fn = anchored_lipschitz(anchors, rng.uniform(0, 1, 6), rng.uniform(1, 3))
        elif kind == "step":
            ang = rng.uniform(0, 2 * math.pi)
            nx, ny = math.cos(ang), math.sin(ang)
            t = nx * mid[0] + ny * mid[1] + rng.uniform(-0.2, 0.2) * span
            fn = half_plane(nx, ny, t)
        elif kind == "arc":
            while True:
                c = rng.uniform(lo, hi)
                r = rng.uniform(0.15, 0.4) * span
                fn = disc_indicator(c[0], c[1], r)
                v = disc.boundary_values(fn).values
                if 0 < v.sum() < len(v):
                    break
        else:
            fn = angular_wave(mid[0], mid[1], int(rng.choice([2, 3, 5, 8])), rng.uniform(0, 2 * math.pi))
        makers.append((f"{kind}-{i}", fn))
    return [(name, disc.boundary_values(fn)) for name, fn in makers]


def named_fixture(name: str, disc: Discretization, seed: int = 0) -> FieldFn:
    """Boundary data by name: constant, coordinate, step, arc, lipschitz, wave."""
    lo, hi = _bbox(disc)
    mid = (lo + hi) / 2
    table = {
        "constant": lambda x, y: np.ones_like(x),
        "coordinate": lambda x, y: x,
        "step": lambda x, y: (x < mid[0]).astype(float),
        "arc": lambda x, y: ((y <= lo[1] + 1e-12) & (x < mid[0])).astype(float),
        "wave": angular_wave(mid[0], mid[1], 3),
    }
    if name == "lipschitz":
        rng = np.random.default_rng(seed)
        fn = anchored_lipschitz(rng.uniform(lo, hi, (6, 2)), rng.uniform(0, 1, 6), 2.0)
    elif name in table:
        fn = table[name]
    else:
        raise KeyError(f"unknown fixture {name!r}; choose from {sorted(table) + ['lipschitz']}")
    return disc.boundary_values(fn)


# ---------------------------------------------------------------------------
# the circle of circumference 1, parametrized by x in [0, 1)


def circle_points(n: int) -> np.ndarray:
    t = (np.arange(n) + 0.5) / n
    return np.column_stack([np.cos(2 * math.pi * t), np.sin(2 * math.pi * t)]) / (2 * math.pi), t


def circle_field(fn, n: int = 4096) -> FieldFn:
    """Sample fn(t), t in [0, 1), on a circle of length 1 with arclength weights."""
    pts, t = circle_points(n)
    chord = 2 * math.sin(math.pi / n) / (2 * math.pi)
    return FieldFn(fn(t), pts, np.full(n, 1.0 / n), "boundary", chord)


def weierstrass(K: int, alpha: float = 0.5):
    """Partial sum sum_{k=1}^K cos(2^k pi x) / 2^(k alpha), 1-periodic."""
    def fn(t):
        return sum(np.cos(2.0**k * math.pi * t) / 2.0 ** (k * alpha) for k in range(1, K + 1))
    return fn


def divergent(J: int):
    """sum_{j<=J} chi_[1/(j+1), 1/j)(x) u(4^j x), u the 1-periodic chi_[0, 1/2)."""
    def fn(t):
        t = np.asarray(t, dtype=float)
        out = np.zeros_like(t)
        for j in range(1, J + 1):
            inside = (t >= 1 / (j + 1)) & (t < 1 / j)
            out[inside] = (np.mod(4.0**j * t[inside], 1.0) < 0.5)
        return out
    return fn


def circle_family(n: int = 2048, seed: int = 0):
    """Circle fixtures for the function-space chain (name, FieldFn)."""
    rng = np.random.default_rng(seed)
    out = [
        ("cos1", circle_field(lambda t: np.cos(2 * math.pi * t), n)),
        ("arc", circle_field(lambda t: (t < 0.3).astype(float), n)),
        ("two-arcs", circle_field(lambda t: ((t > 0.1) & (t < 0.2)) | ((t > 0.5) & (t < 0.8)), n)),
        ("sawtooth", circle_field(lambda t: t, n)),
        ("weierstrass-6", circle_field(weierstrass(6), n)),
        ("divergent-3", circle_field(divergent(3), n)),
    ]
    for i in range(3):
        anchors = rng.uniform(0, 1, 5)
        vals = rng.uniform(-1, 1, 5)
        L = rng.uniform(2, 8)

        def fn(t, anchors=anchors, vals=vals, L=L):
            d = np.abs(t[:, None] - anchors)
            d = np.minimum(d, 1 - d)
            return np.min(vals + L * d, axis=1)
        out.append((f"lipschitz-{i}", circle_field(fn, n)))
    return out


# ---------------------------------------------------------------------------
# exact fixed-ball energy of the divergent example on (0, 1)


def _ones_measure(j: int, x: Fraction) -> Fraction:
    """Length of {t in [0, x): u(4^j t) = 1}."""
    P = 4**j
    y = x * P
    fl = y.numerator // y.denominator
    return (Fraction(fl, 2) + min(y - fl, Fraction(1, 2))) / P


def divergent_fixed_balls(J: int, extra_levels: int = 40):
    """Exact sum over k of sum over B in B^k of int_B |f - f_B| for the J-term example.

    B^k = {(l 2^-k, (l+2) 2^-k) : 0 <= l <= 2^k - 2} with Lebesgue measure.
    Balls inside one piece are counted in closed form; balls containing a
    piece endpoint are integrated exactly with rational arithmetic. Levels run
    to k = 2J + 1 + extra_levels; the omitted tail is below 2^-extra_levels.

    Returns (value, [(k, contribution), ...]).
    """
    a = {j: Fraction(1, j + 1) for j in range(1, J + 1)}
    b = {j: Fraction(1, j) for j in range(1, J + 1)}
    mass = {j: _ones_measure(j, b[j]) - _ones_measure(j, a[j]) for j in a}
    left = {}
    acc = Fraction(0)
    for j in range(J, 0, -1):  # pieces to the left of piece j have larger index
        left[j] = acc
        acc += mass[j]

    def F(x: Fraction) -> Fraction:
        if x <= a[J]:
            return Fraction(0)
        j = min(J, int(1 / x)) if x < 1 else 1
        return left[j] + _ones_measure(j, x) - _ones_measure(j, a[j])

    table = []
    for k in range(1, 2 * J + 2 + extra_levels):
        step = Fraction(1, 2**k)
        n_balls = 2**k - 1
        total = Fraction(0)
        straddle = set()
        for c in a.values():
            y = c * 2**k
            fl = y.numerator // y.denominator
            cands = (fl - 1,) if y.denominator == 1 else (fl - 1, fl)
            straddle.update(l for l in cands if 0 <= l < n_balls)
        length = 2 * step
        for l in straddle:
            m = F((l + 2) * step) - F(l * step)
            total += 2 * m * (length - m) / length
        for j in range(1, J + 1):
            lo = -((-a[j] * 2**k).numerator // (a[j] * 2**k).denominator)  # ceil
            hi = (b[j] * 2**k).numerator // (b[j] * 2**k).denominator - 2
            count = max(0, hi - lo + 1)
            if count == 0:
                continue
            if k <= 2 * j + 1:
                total += count * step
            else:
                q = 2 ** (k - 2 * j - 1)
                jumps = (hi + 1) // q - lo // q  # multiples of q in [lo + 1, hi + 1]
                total += jumps * step
        table.append((k, total))
    value = sum((t for _, t in table), Fraction(0))
    return float(value), [(k, float(t)) for k, t in table]


def harmonic(J: int) -> float:
    return math.fsum(1.0 / k for k in range(1, J + 1))


# ---------------------------------------------------------------------------
# thin tubes: exact norms of u_n = indicator of the closed tube U_n


def thin_tube_norms(n: int) -> dict:
    """Closed-form norms of the tube indicator u_n.

    L1 norm is the tube area, the variation is the length of the tube mouth,
    and the trace norm is the co-dimension 1 measure of the walls and top
    (pi/2 times their length for planar Lebesgue measure).
    """
    rects = thin_tube_rects(n)
    x0, x1, _, top = rects[n]
    width = x1 - x0
    l1 = width * top
    variation = width
    trace = math.pi / 2 * (2 * top + width)
    return {"n": n, "width": width, "height": top, "l1": l1, "variation": variation,
            "bv": l1 + variation, "trace_l1": trace, "ratio": trace / (l1 + variation)}


def thin_tube_trace_measure(disc: Discretization, n: int) -> float:
    """Calibrated boundary weight of the walls and top of tube U_n in a discretization."""
    x0, x1, _, top = thin_tube_rects(n)[n]
    p = disc.boundary_points
    on = (p[:, 0] >= x0 - 1e-15) & (p[:, 0] <= x1 + 1e-15) & (p[:, 1] > 0) & (p[:, 1] <= top + 1e-15)
    return float(disc.h_weights[on].sum())
