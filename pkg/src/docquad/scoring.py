"""Contour score, region contrast score and their linear combination.

Border rasterization: a top/bottom border is sampled once per pixel column
it spans (column ``i`` reads the row containing the border line at
``x = i + 0.5``) on the horizontal edge map; left/right borders are sampled
once per row on the vertical edge map.  Every border covers the columns
(rows) from the pixel holding one corner to the pixel holding the other.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .edges import DirectionalEdgeMaps
from .errors import DegenerateBorder, EmptyRegion, ParallelLines
from .geometry import Line, Quad, intersect_lines, rasterize_polygon, signed_area
from .imaging import HIST_BINS, quantize_image

TAU_EDGE = 0.05
EXTENSION_LENGTH = 10
REGION_MARGIN = 5
MIN_REGION_PIXELS = 64

# (start vertex, end vertex, uses the horizontal map)
BORDERS = ((0, 1, True), (1, 2, False), (2, 3, True), (3, 0, False))


@dataclass(frozen=True)
class BorderFeatures:
    """Per-border mean intensity ``w`` and consistency ``c`` (top, right,
    bottom, left) and the mean intensity of the eight 10-pixel extensions,
    two per border, in the same border order."""

    w: tuple[float, ...]
    c: tuple[float, ...]
    w_ext: tuple[float, ...]


@dataclass(frozen=True)
class ScoredQuad:
    quad: Quad
    C: float
    R: float = 0.0
    F: float | None = None
    empty_region: bool = False


@dataclass(frozen=True, eq=False)
class RegionPair:
    """Pixel masks of the band just outside (``outer``) and the region just
    inside (``inner``) a quadrilateral."""

    outer: np.ndarray
    inner: np.ndarray

    @property
    def n_outer(self) -> int:
        return int(self.outer.sum())

    @property
    def n_inner(self) -> int:
        return int(self.inner.sum())


def _sample_segment(edge_map, p, q, horizontal):
    """Major-axis pixel span of segment ``p``-``q`` and a sampler on its line."""
    if horizontal:
        (u0, v0), (u1, v1) = p, q
        values = edge_map
    else:
        (v0, u0), (v1, u1) = p, q
        values = edge_map.T
    lo, hi = math.floor(min(u0, u1)), math.floor(max(u0, u1))
    slope = (v1 - v0) / (u1 - u0) if u1 != u0 else 0.0

    def sample(i_start, i_stop):
        i = np.arange(i_start, i_stop)
        j = np.floor(v0 + (i + 0.5 - u0) * slope).astype(np.int64)
        inside = (i >= 0) & (i < values.shape[1]) & (j >= 0) & (j < values.shape[0])
        vals = np.zeros(len(i))
        vals[inside] = values[j[inside], i[inside]]
        return vals, inside

    return lo, hi, sample


def border_features(maps: DirectionalEdgeMaps, q: Quad, tau: float = TAU_EDGE,
                    ext_len: int = EXTENSION_LENGTH) -> BorderFeatures:
    pts = q.array()
    if not np.all(np.isfinite(pts)):
        raise ValueError("quad vertices must be finite")
    w, c, w_ext = [], [], []
    for a, b, horizontal in BORDERS:
        edge_map = maps.horizontal if horizontal else maps.vertical
        lo, hi, sample = _sample_segment(edge_map, pts[a], pts[b], horizontal)
        length = hi - lo + 1
        if length < 2:
            raise DegenerateBorder(f"border {a}-{b} spans {length} pixel(s)")
        vals, _ = sample(lo, hi + 1)
        w.append(float(vals.sum() / length))
        c.append(float(np.count_nonzero(vals > tau) / length))
        for start, stop in ((lo - ext_len, lo), (hi + 1, hi + 1 + ext_len)):
            vals, inside = sample(start, stop)
            n_in = int(inside.sum())
            w_ext.append(float(vals.sum() / n_in) if n_in else 0.0)
    return BorderFeatures(tuple(w), tuple(c), tuple(w_ext))


def contour_score(f: BorderFeatures) -> float:
    return sum(f.w) / (1.0 + sum(1.0 - c for c in f.c)) - sum(f.w_ext)


def _offset_polygon(pts: np.ndarray, d: float):
    """Move every edge line of a simple polygon by ``d`` toward its interior
    (negative ``d`` moves outward).  Returns None when the result folds."""
    sign = 1.0 if signed_area(pts) > 0 else -1.0
    k = len(pts)
    lines = []
    for i in range(k):
        a, b = pts[i], pts[(i + 1) % k]
        e = b - a
        norm = math.hypot(*e)
        if norm == 0:
            return None
        inward = sign * np.array([-e[1], e[0]]) / norm
        lines.append(Line(tuple(a + d * inward), tuple(b + d * inward)))
    try:
        out = np.array([intersect_lines(lines[i - 1], lines[i]) for i in range(k)])
    except ParallelLines:
        return None
    for i in range(k):
        if np.dot(out[(i + 1) % k] - out[i], pts[(i + 1) % k] - pts[i]) <= 0:
            return None
    return out


def extract_regions(q: Quad, frame: tuple[int, int], d: float = REGION_MARGIN,
                    n_min: int = MIN_REGION_PIXELS) -> RegionPair:
    """Inner region: ``q`` with every border moved inward by ``d``.
    Outer band: ``q`` grown outward by ``d``, minus ``q``.  Both clipped to
    the ``(width, height)`` frame."""
    if d < 1:
        raise ValueError("margin must be at least one pixel")
    width, height = frame
    pts = q.array()
    if not np.all(np.isfinite(pts)) or signed_area(pts) == 0:
        raise EmptyRegion("degenerate quadrilateral")
    body = rasterize_polygon(pts, width, height)
    shrunk = _offset_polygon(pts, d)
    grown = _offset_polygon(pts, -d)
    inner = rasterize_polygon(shrunk, width, height) & body if shrunk is not None else np.zeros_like(body)
    outer = rasterize_polygon(grown, width, height) & ~body if grown is not None else np.zeros_like(body)
    regions = RegionPair(outer=outer, inner=inner)
    if regions.n_outer < n_min or regions.n_inner < n_min:
        raise EmptyRegion(f"regions too small: outer={regions.n_outer}, inner={regions.n_inner}")
    return regions


def color_histogram(quantized: np.ndarray, mask: np.ndarray) -> np.ndarray:
    hist = np.bincount(quantized[mask], minlength=HIST_BINS).astype(np.float64)
    total = hist.sum()
    if total == 0:
        raise EmptyRegion("empty region")
    return hist / total


def chi_square(ha: np.ndarray, hb: np.ndarray) -> float:
    """Sum of (a - b)^2 / (a + b) over bins, empty bins contributing zero."""
    ha = np.asarray(ha, dtype=np.float64)
    hb = np.asarray(hb, dtype=np.float64)
    den = ha + hb
    nz = den > 0
    return float(np.sum((ha[nz] - hb[nz]) ** 2 / den[nz]))


def contrast_score(image: np.ndarray, regions: RegionPair, quantized: np.ndarray | None = None) -> float:
    """Chi-square distance between the quantized color histograms of the
    outer band and the inner region; ``quantized`` may carry a cached
    :func:`quantize_image` of ``image``."""
    if quantized is None:
        quantized = quantize_image(image)
    return chi_square(color_histogram(quantized, regions.outer),
                      color_histogram(quantized, regions.inner))


def combined_score(C: float, R: float, k: float) -> float:
    if k < 0:
        raise ValueError("k must be non-negative")
    return k * C + R
