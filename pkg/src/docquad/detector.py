"""End-to-end quadrilateral detection.

Candidates are every pair of horizontal lines crossed with every pair of
vertical lines.  Their contour scores are computed in bulk: each border of a
candidate is a span of one detected line, so per-line prefix sums of edge
intensity give every border sum in O(1).  This is numerically the same
quantity :func:`docquad.scoring.border_features` computes per quad.
"""

from __future__ import annotations

import itertools
import time
from dataclasses import dataclass, field

import numpy as np

from . import calibration
from .edges import DirectionalEdgeMaps, blur_along_gradient, extract_directional_edges
from .errors import DegenerateBorder, EmptyRegion, NotEnoughLines, ParallelLines
from .geometry import PARALLEL_EPS, Quad, quad_from_lines
from .hough import HORIZONTAL, VERTICAL, LineCandidate, fht_many, split_vertical_strips, top_peaks
from .imaging import WorkingImage, prepare_working, quantize_image
from .scoring import (EXTENSION_LENGTH, REGION_MARGIN, TAU_EDGE, ScoredQuad, border_features,
                      contour_score, contrast_score, extract_regions)

CONTOUR = "contour"
COMBINED = "combined"
COORD_LIMIT = 1e9


def _default_k() -> float:
    return calibration.default_calibration().k


@dataclass(frozen=True)
class DetectorConfig:
    n_top: int = 11
    k: float = field(default_factory=_default_k)
    peaks_h: int = 15
    peaks_v_per_strip: int = 15
    sigma_blur: float = 1.5
    tau_edge: float = TAU_EDGE
    margin_d: int = REGION_MARGIN
    mode: str = COMBINED

    def __post_init__(self):
        if self.n_top < 1:
            raise ValueError("n_top must be at least 1")
        if self.k < 0:
            raise ValueError("k must be non-negative")
        if self.mode not in (CONTOUR, COMBINED):
            raise ValueError(f"mode must be {CONTOUR!r} or {COMBINED!r}")


@dataclass(eq=False)
class DetectionResult:
    best: Quad | None
    alternatives: list[ScoredQuad]
    working: WorkingImage
    lines_h: list[LineCandidate] = field(default_factory=list)
    lines_v: list[LineCandidate] = field(default_factory=list)
    timings: dict[str, float] = field(default_factory=dict)
    flags: set[str] = field(default_factory=set)

    @property
    def failed(self) -> bool:
        return self.best is None


def generate_candidates(lines_h, lines_v) -> list[Quad]:
    if len(lines_h) < 2 or len(lines_v) < 2:
        raise NotEnoughLines(f"{len(lines_h)} horizontal / {len(lines_v)} vertical lines")
    quads = []
    for h1, h2 in itertools.combinations(lines_h, 2):
        for v1, v2 in itertools.combinations(lines_v, 2):
            try:
                quads.append(quad_from_lines(h1, h2, v1, v2))
            except ParallelLines:
                continue
    return quads


def _contour_or_floor(maps, q, tau):
    try:
        return contour_score(border_features(maps, q, tau))
    except DegenerateBorder:
        return -np.inf


def rank_by_contour(candidates, maps: DirectionalEdgeMaps, tau: float = TAU_EDGE) -> list[ScoredQuad]:
    """Score each quad on its own and sort by descending contour score.

    Quads with a border shorter than two pixels rank last.
    """
    scored = [ScoredQuad(q, _contour_or_floor(maps, q, tau)) for q in candidates]
    return sorted(scored, key=lambda s: -s.C)


# --- bulk contour scoring -------------------------------------------------

def _line_arrays(lines):
    p0 = np.array([l.p0 for l in lines], dtype=float)
    p1 = np.array([l.p1 for l in lines], dtype=float)
    return p0, p1


def _profiles(lines, values: np.ndarray, horizontal: bool, tau: float):
    """Prefix sums along each line of intensity, above-threshold count and
    in-frame count; index ``i`` sums major-axis pixels ``0 .. i-1``."""
    if not horizontal:
        values = values.T
    rows, cols = values.shape
    p0, p1 = _line_arrays(lines)
    if horizontal:
        u0, v0, du, dv = p0[:, 0], p0[:, 1], p1[:, 0] - p0[:, 0], p1[:, 1] - p0[:, 1]
    else:
        u0, v0, du, dv = p0[:, 1], p0[:, 0], p1[:, 1] - p0[:, 1], p1[:, 0] - p0[:, 0]
    slope = dv / du
    i = np.arange(cols) + 0.5
    j = np.floor(v0[:, None] + (i[None, :] - u0[:, None]) * slope[:, None]).astype(np.int64)
    inside = (j >= 0) & (j < rows)
    vals = np.where(inside, values[np.clip(j, 0, rows - 1), np.arange(cols)[None, :]], 0.0)
    zero = np.zeros((len(lines), 1))
    csum = lambda a: np.concatenate([zero, np.cumsum(a, axis=1)], axis=1)
    return csum(vals), csum((vals > tau).astype(float)), csum(inside.astype(float)), cols


def _span_sums(prefix, line_idx, lo, hi, cols):
    """Sum of ``prefix``'s underlying row ``line_idx`` over pixels ``lo..hi``."""
    a = np.clip(lo, 0, cols)
    b = np.clip(hi + 1, 0, cols)
    b = np.maximum(a, b)
    return prefix[line_idx, b] - prefix[line_idx, a]


def _border_table(profiles, line_idx, u_a, u_b, ext_len):
    """Features of borders lying on lines ``line_idx`` between major-axis
    coordinates ``u_a`` and ``u_b``; all arrays broadcast together."""
    S, T, N, cols = profiles
    lo = np.floor(np.minimum(u_a, u_b)).astype(np.int64)
    hi = np.floor(np.maximum(u_a, u_b)).astype(np.int64)
    length = hi - lo + 1
    w = _span_sums(S, line_idx, lo, hi, cols) / length
    c = _span_sums(T, line_idx, lo, hi, cols) / length
    ext = np.zeros_like(w)
    for e_lo, e_hi in ((lo - ext_len, lo - 1), (hi + 1, hi + ext_len)):
        n_in = _span_sums(N, line_idx, e_lo, e_hi, cols)
        s = _span_sums(S, line_idx, e_lo, e_hi, cols)
        ext = ext + np.where(n_in > 0, s / np.maximum(n_in, 1), 0.0)
    return w, c, ext, length >= 2


def _intersections(lines_h, lines_v):
    """Corner grid ``X, Y`` of shape ``(nh, nv)`` plus a non-parallel mask.

    Uses the same arithmetic as :func:`docquad.geometry.intersect_lines`.
    """
    hp0, hp1 = _line_arrays(lines_h)
    vp0, vp1 = _line_arrays(lines_v)
    r = (hp1 - hp0)[:, None, :]
    p = hp0[:, None, :]
    s = (vp1 - vp0)[None, :, :]
    q = vp0[None, :, :]
    denom = r[..., 0] * s[..., 1] - r[..., 1] * s[..., 0]
    ok = np.abs(denom) > PARALLEL_EPS * np.hypot(r[..., 0], r[..., 1]) * np.hypot(s[..., 0], s[..., 1])
    qp = q - p
    with np.errstate(divide="ignore", invalid="ignore"):
        t = (qp[..., 0] * s[..., 1] - qp[..., 1] * s[..., 0]) / denom
    X = p[..., 0] + t * r[..., 0]
    Y = p[..., 1] + t * r[..., 1]
    ok &= np.isfinite(X) & np.isfinite(Y)
    # near-parallel crossings can land absurdly far away; keep them finite
    # and small enough for integer pixel indices
    X = np.clip(np.where(ok, X, 0.0), -COORD_LIMIT, COORD_LIMIT)
    Y = np.clip(np.where(ok, Y, 0.0), -COORD_LIMIT, COORD_LIMIT)
    return X, Y, ok


def _ordered_pairs(lines, key):
    pairs = np.array(list(itertools.combinations(range(len(lines)), 2)), dtype=np.int64)
    first, second = pairs[:, 0], pairs[:, 1]
    swap = key[first] > key[second]
    return np.where(swap, second, first), np.where(swap, first, second)


def bulk_contour_scores(lines_h, lines_v, maps: DirectionalEdgeMaps,
                        tau: float = TAU_EDGE, ext_len: int = EXTENSION_LENGTH):
    """Contour scores of all candidates in generation order.

    Returns ``(corners, scores)``: ``corners`` is ``(M, 4, 2)`` for the
    non-parallel candidates and ``scores`` their contour scores, with
    ``-inf`` for candidates having a border under two pixels long.
    """
    if len(lines_h) < 2 or len(lines_v) < 2:
        raise NotEnoughLines(f"{len(lines_h)} horizontal / {len(lines_v)} vertical lines")
    X, Y, ok = _intersections(lines_h, lines_v)
    hp0, hp1 = _line_arrays(lines_h)
    vp0, vp1 = _line_arrays(lines_v)
    top, bot = _ordered_pairs(lines_h, (hp0[:, 1] + hp1[:, 1]) / 2.0)
    left, right = _ordered_pairs(lines_v, (vp0[:, 0] + vp1[:, 0]) / 2.0)

    prof_h = _profiles(lines_h, maps.horizontal, True, tau)
    prof_v = _profiles(lines_v, maps.vertical, False, tau)
    # horizontal line h between its crossings with the left/right line of each v-pair
    h_idx = np.arange(len(lines_h))[:, None]
    Wh, Ch, Eh, Gh = _border_table(prof_h, h_idx, X[:, left], X[:, right], ext_len)  # (nh, nvp)
    v_idx = np.arange(len(lines_v))[:, None]
    Wv, Cv, Ev, Gv = _border_table(prof_v, v_idx, Y[top, :].T, Y[bot, :].T, ext_len)  # (nv, nhp)

    w_sum = Wh[top] + Wh[bot] + Wv[left].T + Wv[right].T  # (nhp, nvp)
    miss = (1 - Ch[top]) + (1 - Ch[bot]) + (1 - Cv[left].T) + (1 - Cv[right].T)
    penalty = Eh[top] + Eh[bot] + Ev[left].T + Ev[right].T
    scores = w_sum / (1.0 + miss) - penalty
    good = Gh[top] & Gh[bot] & Gv[left].T & Gv[right].T
    scores = np.where(good, scores, -np.inf)

    valid = ok[top][:, left] & ok[top][:, right] & ok[bot][:, left] & ok[bot][:, right]
    corners = np.stack([
        np.stack([X[top][:, left], Y[top][:, left]], axis=-1),
        np.stack([X[top][:, right], Y[top][:, right]], axis=-1),
        np.stack([X[bot][:, right], Y[bot][:, right]], axis=-1),
        np.stack([X[bot][:, left], Y[bot][:, left]], axis=-1),
    ], axis=2)  # (nhp, nvp, 4, 2)
    valid = valid.ravel()
    return corners.reshape(-1, 4, 2)[valid], scores.ravel()[valid]


# --- pipeline ---------------------------------------------------------------

def find_lines(maps: DirectionalEdgeMaps, cfg: DetectorConfig):
    height, width = maps.shape
    frame = (width, height)
    (space_h,) = fht_many([maps.horizontal], HORIZONTAL, frame_size=frame)
    strips = split_vertical_strips(maps.vertical)
    spaces_v = fht_many([s for s, _ in strips], VERTICAL, offsets=[o for _, o in strips],
                        strips=[0, 1, 2], frame_size=frame)
    lines_h = top_peaks(space_h, cfg.peaks_h)
    lines_v = [line for sp in spaces_v for line in top_peaks(sp, cfg.peaks_v_per_strip)]
    return lines_h, lines_v


def edge_maps(working: WorkingImage, cfg: DetectorConfig) -> DirectionalEdgeMaps:
    return blur_along_gradient(extract_directional_edges(working.working_gray), cfg.sigma_blur)


def top_alternatives(working: WorkingImage, cfg: DetectorConfig, timings=None, flags=None):
    """Run the pipeline up to the ``n_top`` contour-ranked alternatives, each
    carrying its contrast score.  Returns ``(alternatives, lines_h, lines_v)``.
    """
    timings = {} if timings is None else timings
    flags = set() if flags is None else flags
    t0 = time.perf_counter()
    maps = edge_maps(working, cfg)
    t1 = time.perf_counter()
    lines_h, lines_v = find_lines(maps, cfg)
    t2 = time.perf_counter()
    timings.update(edges=t1 - t0, hough=t2 - t1)
    corners, scores = bulk_contour_scores(lines_h, lines_v, maps, cfg.tau_edge)
    if len(scores) == 0:
        raise NotEnoughLines("every line pair is parallel")
    order = np.argsort(-scores, kind="stable")[: cfg.n_top]
    t3 = time.perf_counter()
    timings["contour"] = t3 - t2

    quantized = quantize_image(working.working_rgb)
    frame = (working.width, working.height)
    alternatives = []
    for idx in order:
        q = Quad.from_array(corners[idx])
        C = float(scores[idx])
        try:
            R = contrast_score(working.working_rgb, extract_regions(q, frame, cfg.margin_d), quantized)
            empty = False
        except EmptyRegion:
            R, empty = 0.0, True
            flags.add("empty_region")
        alternatives.append(ScoredQuad(q, C, R, cfg.k * C + R, empty_region=empty))
    timings["contrast"] = time.perf_counter() - t3
    return alternatives, lines_h, lines_v


def detect_working(working: WorkingImage, cfg: DetectorConfig | None = None) -> DetectionResult:
    cfg = cfg or DetectorConfig()
    timings: dict[str, float] = {}
    flags: set[str] = set()
    start = time.perf_counter()
    try:
        alternatives, lines_h, lines_v = top_alternatives(working, cfg, timings, flags)
    except NotEnoughLines:
        flags.add("not_enough_lines")
        timings["total"] = time.perf_counter() - start
        return DetectionResult(None, [], working, timings=timings, flags=flags)
    if cfg.mode == COMBINED:
        alternatives = sorted(alternatives, key=lambda s: -s.F)
    best = Quad.from_array(working.to_original(alternatives[0].quad.array()))
    timings["total"] = time.perf_counter() - start
    return DetectionResult(best, alternatives, working, lines_h, lines_v, timings, flags)


def detect(image: np.ndarray, cfg: DetectorConfig | None = None) -> DetectionResult:
    return detect_working(prepare_working(image), cfg)
