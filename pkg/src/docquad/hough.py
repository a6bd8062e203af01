"""Fast Hough Transform over directional edge maps and peak extraction.

Dyadic line patterns
--------------------
Work in the frame of a "vertical" map: ``n`` rows (a power of two) and
lines that drift right by ``s`` columns, ``0 <= s < n``, between row 0 and
row ``n - 1``.  The pattern ``D(n, s)`` is a list of per-row column offsets:

    D(1, 0)  = [0]
    D(2m, s) = D(m, s // 2) + [ceil(s / 2) + o for o in D(m, s // 2)]

so the top half covers the first ``floor(s/2)`` columns of drift and the
bottom half starts ``ceil(s/2)`` columns to the right.  The accumulator
cell ``(x, s)`` holds ``sum_r map[r, x + D(n, s)[r]]`` with out-of-range
columns contributing zero.  The recursion is evaluated bottom-up in
``log2(n)`` merges of adjacent row blocks.

Negative drifts come from running the same recursion on the mirrored map.
Maps are zero-padded to ``n`` rows and by ``n - 1`` columns on the side the
lines enter from, so every line with ``|tangent| <= 1`` that crosses the map
has a cell.  Horizontal maps are transposed first.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import as_strided

from .errors import ImageTooSmall

HORIZONTAL = "horizontal"
VERTICAL = "vertical"


@dataclass(frozen=True, eq=False)
class HoughSpace:
    """Accumulator indexed by ``[shift_index, slope_index]``.

    ``shift = shift_index - (n - 1)`` is the column (row, for horizontal
    spaces) where the line enters at the start of the recursion axis;
    ``slope = slope_index - (n - 1)`` is its total drift over ``n - 1``
    steps along that axis.
    """

    accumulator: np.ndarray
    orientation: str
    n: int
    offset: int = 0
    strip: int = 0
    frame_size: tuple[int, int] | None = None  # (width, height) of the full frame

    @property
    def pad(self) -> int:
        return self.n - 1

    def cell_to_points(self, shift_index: int, slope_index: int):
        """Two continuous points on the line of a cell, in frame coordinates."""
        shift = shift_index - self.pad
        slope = slope_index - self.pad
        a = (shift + 0.5, self.offset + 0.5)
        b = (shift + slope + 0.5, self.offset + max(self.n - 1, 1) + 0.5)
        if self.orientation == HORIZONTAL:
            a, b = (a[1], a[0]), (b[1], b[0])
        return a, b


@dataclass(frozen=True)
class LineCandidate:
    """A detected line; ``p0``/``p1`` lie on opposite frame borders."""

    p0: tuple[float, float]
    p1: tuple[float, float]
    orientation: str
    strength: float
    strip: int = 0

    @property
    def slope(self) -> float:
        """Drift per unit step along the major axis (x for horizontal lines)."""
        (x0, y0), (x1, y1) = self.p0, self.p1
        if self.orientation == HORIZONTAL:
            return (y1 - y0) / (x1 - x0)
        return (x1 - x0) / (y1 - y0)

    @property
    def intercept(self) -> float:
        """Minor coordinate at major coordinate 0."""
        (x0, y0) = self.p0
        if self.orientation == HORIZONTAL:
            return y0 - self.slope * x0
        return x0 - self.slope * y0


def next_pow2(v: int) -> int:
    return 1 << max(0, int(v - 1).bit_length())


def _fht_positive(stack: np.ndarray) -> np.ndarray:
    """Bottom-up dyadic recursion for non-negative drifts.

    ``stack`` has shape ``(batch, n, width)`` with ``n`` a power of two.
    Returns ``(batch, n, width)`` indexed ``[b, s, x]``.
    """
    batch, n, width = stack.shape
    # cur[b, block, s, x]
    cur = stack.reshape(batch, n, 1, width).astype(np.float64, copy=True)
    m = 1
    while m < n:
        top = cur[:, 0::2]
        bot = cur[:, 1::2]
        nb = top.shape[1]
        # zero-padded rows so that bot[..., h, h + x] for every h is one
        # skewed strided view (row stride one element longer than a row)
        wide = width + m + 1
        padded = np.zeros((batch, nb, m, wide))
        padded[..., :width] = bot
        sb, snb, sh, sx = padded.strides
        new = np.empty((batch, nb, 2 * m, width))
        for parity in (0, 1):  # drift 2h (+h) and 2h + 1 (+h + 1)
            skew = as_strided(padded[..., parity:], shape=(batch, nb, m, width),
                              strides=(sb, snb, sh + sx, sx), writeable=False)
            np.add(top, skew, out=new[:, :, parity::2, :])
        cur = new
        m *= 2
    return cur[:, 0]


def _fht_batch(maps: list[np.ndarray], n: int) -> np.ndarray:
    """Full signed-drift accumulators for same-width maps (vertical frame).

    Returns ``(len(maps), width + 2n - 2, 2n - 1)``; shift index ``x + n - 1``
    covers entry columns ``-(n - 1) .. width + n - 2``.
    """
    pad = n - 1
    width = maps[0].shape[1]
    padded = []
    for m in maps:
        for src in (m, m[:, ::-1]):
            p = np.zeros((n, width + pad))
            p[: m.shape[0], pad:] = src
            padded.append(p)
    res = _fht_positive(np.stack(padded))
    out = np.zeros((len(maps), width + 2 * pad, 2 * n - 1))
    # mirrored column c is original column width - 1 - (c - pad); a drift of
    # +s there is a drift of -s in the original
    c = np.arange(width + pad)
    neg_idx = (width - 1 - (c - pad)) + pad
    neg_slopes = pad - np.arange(1, n)
    for i in range(len(maps)):
        out[i, : width + pad, pad:] = res[2 * i].T
        out[i, neg_idx[:, None], neg_slopes[None, :]] = res[2 * i + 1][1:].T
    return out


def fht(edge_map: np.ndarray, orientation: str, offset: int = 0, strip: int = 0,
        frame_size: tuple[int, int] | None = None) -> HoughSpace:
    if edge_map.size == 0:
        raise ImageTooSmall("empty edge map")
    return fht_many([edge_map], orientation, [offset], [strip], frame_size)[0]


def fht_many(maps, orientation, offsets=None, strips=None, frame_size=None) -> list[HoughSpace]:
    """Run :func:`fht` on several same-shape maps in one batched recursion."""
    maps = [np.asarray(m, dtype=np.float64) for m in maps]
    if orientation == HORIZONTAL:
        maps = [m.T for m in maps]
    elif orientation != VERTICAL:
        raise ValueError(f"unknown orientation {orientation!r}")
    offsets = offsets or [0] * len(maps)
    strips = strips or [0] * len(maps)
    widths = {m.shape[1] for m in maps}
    if len(widths) != 1:
        raise ValueError("batched maps must share the cross-axis size")
    n = next_pow2(max(m.shape[0] for m in maps))
    acc = _fht_batch(maps, n)
    return [
        HoughSpace(acc[i], orientation, n, offset=offsets[i], strip=strips[i], frame_size=frame_size)
        for i in range(len(maps))
    ]


def split_vertical_strips(edge_map: np.ndarray):
    """Cut into three horizontal bands; the last absorbs the remainder.

    Returns ``[(strip, row_offset), ...]`` top to bottom.
    """
    h = edge_map.shape[0]
    if h < 3:
        raise ImageTooSmall(f"need at least 3 rows to split, got {h}")
    part = -(-h // 3)
    cuts = [0, part, 2 * part, h]
    return [(edge_map[cuts[i]:cuts[i + 1]], cuts[i]) for i in range(3)]


def top_peaks(space: HoughSpace, count: int, radius: int = 2) -> list[LineCandidate]:
    """Strongest local maxima with greedy Chebyshev-radius suppression."""
    if count < 1:
        raise ValueError("count must be positive")
    acc = space.accumulator
    rows_n, cols_n = acc.shape
    flat_acc = acc.ravel()
    positive = int(np.count_nonzero(flat_acc > 0))
    # Walk cells in (descending strength, flat index) order, but only sort
    # the strongest block; widen the block if it runs out before ``count``
    # peaks are found.  Visiting order matches a full stable sort.
    block = min(positive, 64 * count)
    while True:
        if block < positive:
            cut = np.partition(flat_acc, flat_acc.size - block)[flat_acc.size - block]
            cells = np.flatnonzero(flat_acc >= max(cut, np.nextafter(0, 1)))
        else:
            cells = np.flatnonzero(flat_acc > 0)
        cells = cells[np.argsort(-flat_acc[cells], kind="stable")]
        picked: list[tuple[int, int]] = []
        for r, c in zip(*np.unravel_index(cells, acc.shape)):
            r, c = int(r), int(c)
            v = acc[r, c]
            if v < acc[max(r - 1, 0):r + 2, max(c - 1, 0):c + 2].max():
                continue  # not a local maximum
            if any(abs(r - pr) <= radius and abs(c - pc) <= radius for pr, pc in picked):
                continue
            picked.append((r, c))
            if len(picked) == count:
                break
        if len(picked) == count or block >= positive:
            break
        block = min(positive, block * 4)
    return [_cell_to_candidate(space, r, c) for r, c in picked]


def _cell_to_candidate(space: HoughSpace, r: int, c: int) -> LineCandidate:
    (ax, ay), (bx, by) = space.cell_to_points(r, c)
    if space.frame_size is None:
        p0, p1 = (ax, ay), (bx, by)
    elif space.orientation == VERTICAL:
        height = space.frame_size[1]
        k = (bx - ax) / (by - ay)
        p0 = (ax + k * (0.0 - ay), 0.0)
        p1 = (ax + k * (height - ay), float(height))
    else:
        width = space.frame_size[0]
        k = (by - ay) / (bx - ax)
        p0 = (0.0, ay + k * (0.0 - ax))
        p1 = (float(width), ay + k * (width - ax))
    return LineCandidate(p0, p1, space.orientation, float(space.accumulator[r, c]), space.strip)
