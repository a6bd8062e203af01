"""Planar primitives: lines, quads, polygon clipping, homographies, masks."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateQuad, ParallelLines, PointAtInfinity

PARALLEL_EPS = 1e-9
INFINITY_EPS = 1e-12


@dataclass(frozen=True)
class Line:
    p0: tuple[float, float]
    p1: tuple[float, float]

    def __post_init__(self):
        if tuple(self.p0) == tuple(self.p1):
            raise ValueError("line endpoints must be distinct")


@dataclass(frozen=True)
class Quad:
    """Four vertices ordered top-left, top-right, bottom-right, bottom-left."""

    points: tuple[tuple[float, float], ...]

    @classmethod
    def from_array(cls, arr) -> "Quad":
        arr = np.asarray(arr, dtype=float).reshape(4, 2)
        return cls(tuple((float(x), float(y)) for x, y in arr))

    def array(self) -> np.ndarray:
        return np.array(self.points, dtype=float)


@dataclass(frozen=True)
class Template:
    width: float
    height: float

    def __post_init__(self):
        if not (self.width > 0 and self.height > 0):
            raise ValueError("template dimensions must be positive")

    def corners(self) -> np.ndarray:
        w, h = self.width, self.height
        return np.array([[0.0, 0.0], [w, 0.0], [w, h], [0.0, h]])


def intersect_lines(a, b) -> tuple[float, float]:
    p = np.asarray(a.p0, dtype=float)
    r = np.asarray(a.p1, dtype=float) - p
    q = np.asarray(b.p0, dtype=float)
    s = np.asarray(b.p1, dtype=float) - q
    denom = r[0] * s[1] - r[1] * s[0]
    if abs(denom) <= PARALLEL_EPS * np.hypot(*r) * np.hypot(*s):
        raise ParallelLines("lines are parallel")
    qp = q - p
    t = (qp[0] * s[1] - qp[1] * s[0]) / denom
    x, y = p + t * r
    return float(x), float(y)


def _mean_y(line) -> float:
    return (line.p0[1] + line.p1[1]) / 2.0


def _mean_x(line) -> float:
    return (line.p0[0] + line.p1[0]) / 2.0


def quad_from_lines(h1, h2, v1, v2) -> Quad:
    if _mean_y(h1) > _mean_y(h2):
        h1, h2 = h2, h1
    if _mean_x(v1) > _mean_x(v2):
        v1, v2 = v2, v1
    return Quad((
        intersect_lines(h1, v1),
        intersect_lines(h1, v2),
        intersect_lines(h2, v2),
        intersect_lines(h2, v1),
    ))


def signed_area(poly) -> float:
    p = np.asarray(poly, dtype=float).reshape(-1, 2)
    if len(p) < 3:
        return 0.0
    x, y = p[:, 0], p[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))


def polygon_area(poly) -> float:
    return abs(signed_area(poly))


def clip_polygon(subject, clip) -> list[tuple[float, float]]:
    """Sutherland-Hodgman clip of ``subject`` by the convex polygon ``clip``."""
    clip = [tuple(map(float, p)) for p in np.asarray(clip, dtype=float).reshape(-1, 2)]
    if signed_area(clip) < 0:
        clip = clip[::-1]
    output = [tuple(map(float, p)) for p in np.asarray(subject, dtype=float).reshape(-1, 2)]

    def inside(p, a, b):
        return (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0]) >= 0

    def cross_point(s, e, a, b):
        dx, dy = e[0] - s[0], e[1] - s[1]
        ex, ey = b[0] - a[0], b[1] - a[1]
        denom = dx * ey - dy * ex
        t = ((a[0] - s[0]) * ey - (a[1] - s[1]) * ex) / denom
        return (s[0] + t * dx, s[1] + t * dy)

    a = clip[-1]
    for b in clip:
        if not output:
            break
        inp, output = output, []
        s = inp[-1]
        for e in inp:
            if inside(e, a, b):
                if not inside(s, a, b):
                    output.append(cross_point(s, e, a, b))
                output.append(e)
            elif inside(s, a, b):
                output.append(cross_point(s, e, a, b))
            s = e
        a = b
    return output


def intersection_area(a, b) -> float:
    """Area of ``a`` clipped by the convex polygon ``b``."""
    pa = a.array() if isinstance(a, Quad) else a
    pb = b.array() if isinstance(b, Quad) else b
    clipped = clip_polygon(pa, pb)
    return polygon_area(clipped) if len(clipped) >= 3 else 0.0


def union_area(a, b) -> float:
    pa = a.array() if isinstance(a, Quad) else a
    pb = b.array() if isinstance(b, Quad) else b
    return polygon_area(pa) + polygon_area(pb) - intersection_area(pa, pb)


def _collinear(p, q, r, tol) -> bool:
    return abs((q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0])) <= tol


def homography_from_points(src, dst) -> np.ndarray:
    src = np.asarray(src, dtype=float).reshape(4, 2)
    dst = np.asarray(dst, dtype=float).reshape(4, 2)
    scale = max(np.ptp(src[:, 0]), np.ptp(src[:, 1]), 1e-300)
    tol = 1e-9 * scale * scale
    for i in range(4):
        p, q, r = (src[j] for j in range(4) if j != i)
        if _collinear(p, q, r, tol):
            raise DegenerateQuad("three source points are collinear")
    a = np.zeros((8, 8))
    rhs = np.zeros(8)
    for i, ((x, y), (u, v)) in enumerate(zip(src, dst)):
        a[2 * i] = [x, y, 1, 0, 0, 0, -u * x, -u * y]
        a[2 * i + 1] = [0, 0, 0, x, y, 1, -v * x, -v * y]
        rhs[2 * i], rhs[2 * i + 1] = u, v
    try:
        h = np.linalg.solve(a, rhs)  # LU with partial pivoting
    except np.linalg.LinAlgError as exc:
        raise DegenerateQuad(str(exc)) from exc
    return np.append(h, 1.0).reshape(3, 3)


def homography_from_quad(m: Quad, t: Template) -> np.ndarray:
    """Homography taking the vertices of ``m`` to the corners of ``t``."""
    return homography_from_points(m.array(), t.corners())


def apply_homography_points(h: np.ndarray, pts) -> np.ndarray:
    pts = np.asarray(pts, dtype=float).reshape(-1, 2)
    hom = np.column_stack([pts, np.ones(len(pts))]) @ np.asarray(h, dtype=float).T
    w = hom[:, 2]
    if np.any(np.abs(w) <= INFINITY_EPS):
        raise PointAtInfinity("point maps to the line at infinity")
    return hom[:, :2] / w[:, None]


def apply_homography(h: np.ndarray, q: Quad) -> Quad:
    return Quad.from_array(apply_homography_points(h, q.array()))


def rasterize_polygon(poly, width: int, height: int) -> np.ndarray:
    """Even-odd fill sampled at pixel centers ``(i + 0.5, j + 0.5)``."""
    mask = np.zeros((height, width), dtype=bool)
    p = np.asarray(poly, dtype=float).reshape(-1, 2)
    if len(p) < 3 or width <= 0 or height <= 0:
        return mask
    y0 = max(int(np.floor(p[:, 1].min() - 0.5)), 0)
    y1 = min(int(np.ceil(p[:, 1].max() - 0.5)) + 1, height)
    if y0 >= y1:
        return mask
    yc = np.arange(y0, y1) + 0.5
    xc = np.arange(width) + 0.5
    parity = np.zeros((y1 - y0, width), dtype=bool)
    for (ax, ay), (bx, by) in zip(p, np.roll(p, -1, axis=0)):
        if ay == by:
            continue
        rows = (ay > yc) != (by > yc)
        if not rows.any():
            continue
        xi = ax + (yc[rows] - ay) * (bx - ax) / (by - ay)
        parity[rows] ^= xc[None, :] < xi[:, None]
    mask[y0:y1] = parity
    return mask


def rasterize_mask(q: Quad, width: int, height: int) -> np.ndarray:
    if width <= 0 or height <= 0:
        raise ValueError("mask dimensions must be positive")
    return rasterize_polygon(q.array(), width, height)
