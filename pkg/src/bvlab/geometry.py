"""Planar geometry kernels: segment distances, polygon tests, disc/rectangle areas."""

from __future__ import annotations

import math

import numpy as np

_CHUNK = 4096


def segment_distance(points: np.ndarray, segments: np.ndarray) -> np.ndarray:
    """Distance from each point to the nearest of a set of closed segments.

    ``points`` has shape (n, 2) and ``segments`` shape (m, 2, 2).
    """
    points = np.asarray(points, dtype=float).reshape(-1, 2)
    segments = np.asarray(segments, dtype=float).reshape(-1, 2, 2)
    a = segments[:, 0, :]
    ab = segments[:, 1, :] - a
    len2 = np.einsum("ij,ij->i", ab, ab)
    len2 = np.where(len2 > 0, len2, 1.0)
    out = np.empty(len(points))
    for start in range(0, len(points), _CHUNK):
        p = points[start:start + _CHUNK, None, :]
        ap = p - a[None, :, :]
        t = np.clip(np.einsum("nmj,mj->nm", ap, ab) / len2, 0.0, 1.0)
        d = ap - t[..., None] * ab[None, :, :]
        out[start:start + _CHUNK] = np.sqrt(np.einsum("nmj,nmj->nm", d, d).min(axis=1))
    return out


def points_in_polygon(points: np.ndarray, vertices: np.ndarray) -> np.ndarray:
    """Even-odd point-in-polygon test (boundary points are unspecified)."""
    points = np.asarray(points, dtype=float).reshape(-1, 2)
    v = np.asarray(vertices, dtype=float)
    x, y = points[:, 0], points[:, 1]
    inside = np.zeros(len(points), dtype=bool)
    for (x0, y0), (x1, y1) in zip(v, np.roll(v, -1, axis=0)):
        crosses = (y0 > y) != (y1 > y)
        with np.errstate(divide="ignore", invalid="ignore"):
            xc = x0 + (y - y0) * (x1 - x0) / (y1 - y0)
        inside ^= crosses & (x < xc)
    return inside


def polygon_area(vertices: np.ndarray) -> float:
    v = np.asarray(vertices, dtype=float)
    x, y = v[:, 0], v[:, 1]
    return 0.5 * abs(float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1))))


def polygon_edges(vertices: np.ndarray) -> np.ndarray:
    v = np.asarray(vertices, dtype=float)
    return np.stack([v, np.roll(v, -1, axis=0)], axis=1)


def _half_chord_primitive(x: float, r: float) -> float:
    # antiderivative of sqrt(r^2 - x^2) on [-r, r]
    x = min(max(x, -r), r)
    return 0.5 * (x * math.sqrt(max(r * r - x * x, 0.0)) + r * r * math.asin(x / r))


def _corner_area(a: float, b: float, r: float) -> float:
    """Area of {x <= a, y <= b} inside the disc of radius r centred at the origin."""
    if a <= -r or b <= -r:
        return 0.0
    a = min(a, r)
    G = lambda t: _half_chord_primitive(t, r)  # noqa: E731

    def full(u, v):  # integral of 2 s(x)
        return 2.0 * (G(v) - G(u)) if v > u else 0.0

    def capped(u, v):  # integral of b + s(x)
        return b * (v - u) + G(v) - G(u) if v > u else 0.0

    if b >= r:
        return full(-r, a)
    w = math.sqrt(r * r - b * b)
    if b >= 0:
        # |x| >= w: whole chord below b; |x| < w: chord cut at b
        return (full(-r, min(a, -w)) + capped(-w, min(a, w)) + full(w, a))
    return capped(-w, min(a, w))


def disc_rect_area(cx: float, cy: float, r: float,
                   x0: float, x1: float, y0: float, y1: float) -> float:
    """Exact area of B((cx, cy), r) intersected with [x0, x1] x [y0, y1]."""
    if r <= 0 or x1 <= x0 or y1 <= y0:
        return 0.0
    X0, X1, Y0, Y1 = x0 - cx, x1 - cx, y0 - cy, y1 - cy
    area = (_corner_area(X1, Y1, r) - _corner_area(X0, Y1, r)
            - _corner_area(X1, Y0, r) + _corner_area(X0, Y0, r))
    return max(area, 0.0)


def disc_rects_area(center, r: float, rects: np.ndarray) -> float:
    """Area of a disc intersected with a union of pairwise disjoint rectangles.

    ``rects`` rows are (x0, x1, y0, y1).
    """
    cx, cy = float(center[0]), float(center[1])
    total = 0.0
    for x0, x1, y0, y1 in np.asarray(rects, dtype=float):
        if x0 >= cx + r or x1 <= cx - r or y0 >= cy + r or y1 <= cy - r:
            continue
        total += disc_rect_area(cx, cy, r, x0, x1, y0, y1)
    return total
