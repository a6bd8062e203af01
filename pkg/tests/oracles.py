"""Slow, direct reference implementations used to check the fast code."""

from __future__ import annotations

import math

import numpy as np


def dyadic_pattern(n: int, s: int) -> list[int]:
    """Per-row column offsets of the dyadic line with drift ``s`` over ``n`` rows."""
    if n == 1:
        return [0]
    half = dyadic_pattern(n // 2, s // 2)
    return half + [(s + 1) // 2 + o for o in half]


def brute_hough(edge_map: np.ndarray, orientation: str) -> np.ndarray:
    """Accumulator ``[shift + n - 1, slope + n - 1]`` summed pattern by pattern."""
    m = edge_map.T if orientation == "horizontal" else edge_map
    rows, width = m.shape
    n = 1
    while n < rows:
        n *= 2
    pad = n - 1
    acc = np.zeros((width + 2 * pad, 2 * n - 1))
    shifts = np.arange(-pad, width + pad)
    for slope in range(-pad, n):
        offs = dyadic_pattern(n, abs(slope))
        sign = 1 if slope >= 0 else -1
        for r in range(rows):
            cols = shifts + sign * offs[r]
            ok = (cols >= 0) & (cols < width)
            acc[ok, slope + pad] += m[r, cols[ok]]
    return acc


def point_in_polygon(x: float, y: float, poly) -> bool:
    """Even-odd ray casting."""
    inside = False
    k = len(poly)
    for i in range(k):
        (x0, y0), (x1, y1) = poly[i], poly[(i + 1) % k]
        if (y0 > y) != (y1 > y):
            xc = x0 + (y - y0) * (x1 - x0) / (y1 - y0)
            if x < xc:
                inside = not inside
    return inside


def brute_mask(poly, width: int, height: int) -> np.ndarray:
    mask = np.zeros((height, width), dtype=bool)
    for j in range(height):
        for i in range(width):
            mask[j, i] = point_in_polygon(i + 0.5, j + 0.5, poly)
    return mask


def grid_solved_count(samples, ks: np.ndarray) -> np.ndarray:
    """Number of samples whose top combined score at each ``k`` is attained
    by a correct alternative."""
    total = np.zeros(len(ks), dtype=np.int64)
    for s in samples:
        C = np.asarray(s.C)[:, None]
        R = np.asarray(s.R)[:, None]
        ok = np.asarray(s.correct, dtype=bool)
        f = C * ks[None, :] + R
        best = f.max(axis=0)
        if ok.any():
            total += f[ok].max(axis=0) >= best
    return total


def max_breakpoint(samples) -> float:
    best = 0.0
    for s in samples:
        for i in range(len(s.C)):
            for j in range(len(s.C)):
                dc = s.C[i] - s.C[j]
                if dc != 0:
                    k = (s.R[j] - s.R[i]) / dc
                    if math.isfinite(k):
                        best = max(best, k)
    return best


def hist_chi_square(a, b) -> float:
    total = 0.0
    for x, y in zip(a, b):
        if x + y > 0:
            total += (x - y) ** 2 / (x + y)
    return total


def random_quad(rng, scale: float = 1000.0, min_triangle: float = 0.002) -> np.ndarray:
    """Four points in ``[0, scale]^2`` with no three nearly collinear."""
    while True:
        pts = rng.uniform(0, scale, (4, 2))
        areas = []
        for i in range(4):
            a, b, c = (pts[j] for j in range(4) if j != i)
            areas.append(abs((b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])) / 2)
        if min(areas) > min_triangle * scale * scale:
            return pts


def random_convex_quad(rng, size: float) -> np.ndarray:
    """Convex quad ordered clockwise in image coordinates (y down)."""
    while True:
        pts = rng.uniform(-0.1 * size, 1.1 * size, (4, 2))
        c = pts.mean(axis=0)
        order = np.argsort(np.arctan2(pts[:, 1] - c[1], pts[:, 0] - c[0]))
        pts = pts[order]
        cross = []
        for i in range(4):
            (ux, uy), (vx, vy) = pts[(i + 1) % 4] - pts[i], pts[(i + 2) % 4] - pts[(i + 1) % 4]
            cross.append(ux * vy - uy * vx)
        if all(x > 1e-3 * size * size for x in cross):
            return pts


def random_sample(rng, n_max: int = 8):
    """Random TrainingSample; distinct contour scores on a 0.1 lattice keep
    every envelope breakpoint below 5."""
    from docquad.calibration import TrainingSample

    n = int(rng.integers(1, n_max + 1))
    C = rng.choice(11, size=n, replace=False) / 10.0
    R = rng.uniform(0, 0.5, n)
    correct = rng.random(n) < 0.3
    return TrainingSample(tuple(C.tolist()), tuple(R.tolist()), tuple(correct.tolist()))
