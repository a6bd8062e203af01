"""Localization quality: template-space Jaccard index, the correctness
threshold, the symmetric mask Jaccard, and the error taxonomy."""

from __future__ import annotations

import math

import numpy as np

from ..errors import DegenerateQuad, PointAtInfinity
from ..geometry import (Quad, Template, apply_homography, homography_from_quad, intersection_area,
                        polygon_area, rasterize_mask)
from ..hough import HORIZONTAL, VERTICAL

GAMMA = 0.945
OUT_OF_FRAME_FRACTION = 0.20
VICINITY_PX = 5.0

CLASS_NONE = "none"
CLASS_OUT_OF_FRAME = "i"
CLASS_NO_LINE = "ii"
CLASS_RANKING = "iii"
CLASS_ASSUMPTION = "iv"
ERROR_CLASSES = (CLASS_OUT_OF_FRAME, CLASS_NO_LINE, CLASS_RANKING, CLASS_ASSUMPTION)


def jaccard_index(q: Quad, m: Quad, t: Template) -> float:
    """IoU of ``q`` and the template rectangle after mapping ``q`` by the
    homography that takes ``m`` onto the template."""
    h = homography_from_quad(m, t)
    try:
        qp = apply_homography(h, q)
    except PointAtInfinity:
        return 0.0
    rect = t.corners()
    inter = intersection_area(qp, rect)
    union = polygon_area(qp.array()) + polygon_area(rect) - inter
    if union <= 0:
        return 0.0
    return float(min(max(inter / union, 0.0), 1.0))


def safe_jaccard(q: Quad | None, m: Quad, t: Template) -> float:
    """:func:`jaccard_index` with failed detections and degenerate inputs as 0."""
    if q is None:
        return 0.0
    try:
        return jaccard_index(q, m, t)
    except DegenerateQuad:
        return 0.0


def is_correct(q: Quad, m: Quad, t: Template, gamma: float = GAMMA) -> bool:
    return is_correct_ji(safe_jaccard(q, m, t), gamma)


def is_correct_ji(ji: float, gamma: float = GAMMA) -> bool:
    return ji >= gamma


def _iou(a: np.ndarray, b: np.ndarray) -> float:
    union = np.count_nonzero(a | b)
    if union == 0:
        return 1.0
    return np.count_nonzero(a & b) / union


def mask_jaccard(q: Quad, m: Quad, width: int, height: int) -> float:
    mq = rasterize_mask(q, width, height)
    mm = rasterize_mask(m, width, height)
    return 0.5 * (_iou(mq, mm) + _iou(~mq, ~mm))


# --- error taxonomy -------------------------------------------------------

def _borders(pts):
    return [(pts[a], pts[b], horizontal)
            for a, b, horizontal in ((0, 1, True), (1, 2, False), (2, 3, True), (3, 0, False))]


def _clip_segment(p, q, width, height):
    """Liang-Barsky clip of segment ``p``-``q`` to ``[0, width] x [0, height]``."""
    t0, t1 = 0.0, 1.0
    dx, dy = q[0] - p[0], q[1] - p[1]
    for edge_p, edge_q in ((-dx, p[0]), (dx, width - p[0]), (-dy, p[1]), (dy, height - p[1])):
        if edge_p == 0:
            if edge_q < 0:
                return None
            continue
        r = edge_q / edge_p
        if edge_p < 0:
            t0 = max(t0, r)
        else:
            t1 = min(t1, r)
        if t0 > t1:
            return None
    return (p[0] + t0 * dx, p[1] + t0 * dy), (p[0] + t1 * dx, p[1] + t1 * dy), t1 - t0


def in_frame_fraction(p, q, width, height) -> float:
    """Share of a border's rasterized pixels that fall inside the frame."""
    horizontal = abs(q[1] - p[1]) <= abs(q[0] - p[0])
    u0, v0, u1, v1 = (p[0], p[1], q[0], q[1]) if horizontal else (p[1], p[0], q[1], q[0])
    lo, hi = math.floor(min(u0, u1)), math.floor(max(u0, u1))
    i = np.arange(lo, hi + 1) + 0.5
    slope = (v1 - v0) / (u1 - u0) if u1 != u0 else 0.0
    j = np.floor(v0 + (i - u0) * slope)
    major, minor = (width, height) if horizontal else (height, width)
    inside = (i >= 0) & (i < major) & (j >= 0) & (j < minor)
    return float(inside.mean())


def _point_line_distance(pt, line) -> float:
    (x0, y0), (x1, y1) = line.p0, line.p1
    dx, dy = x1 - x0, y1 - y0
    return abs(dy * (pt[0] - x0) - dx * (pt[1] - y0)) / math.hypot(dx, dy)


def classify_error(m_working: np.ndarray, frame: tuple[int, int], lines_h, lines_v) -> str:
    """Cause of a failed detection, checked in the order iv, i, ii, iii.

    ``m_working`` is the ground-truth quad in working coordinates.
    """
    width, height = frame
    pts = np.asarray(m_working, dtype=float).reshape(4, 2)
    borders = _borders(pts)
    for p, q, horizontal in borders:
        dx, dy = q[0] - p[0], q[1] - p[1]
        major, minor = (dx, dy) if horizontal else (dy, dx)
        if major == 0 or abs(minor / major) > 1.0:
            return CLASS_ASSUMPTION
    for p, q, _ in borders:
        if in_frame_fraction(p, q, width, height) < OUT_OF_FRAME_FRACTION:
            return CLASS_OUT_OF_FRAME
    for p, q, horizontal in borders:
        clipped = _clip_segment(p, q, width, height)
        if clipped is None:
            continue
        a, b, _ = clipped
        candidates = lines_h if horizontal else lines_v
        if not any(max(_point_line_distance(a, l), _point_line_distance(b, l)) < VICINITY_PX
                   for l in candidates):
            return CLASS_NO_LINE
    return CLASS_RANKING
