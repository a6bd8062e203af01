"""Choice of the contour/contrast combination coefficient ``k``.

For one frame each alternative ``i`` scores ``C_i * k + R_i``, a line in
``k``.  The frame is solved for exactly those ``k >= 0`` where some correct
alternative lies on the upper envelope of these lines.  Collecting those
``k``-intervals over all frames, the best ``k`` is a point covered by the
largest number of intervals, found with a sweep over interval endpoints.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

CALIBRATION_VERSION = 1


@dataclass(frozen=True)
class TrainingSample:
    C: tuple[float, ...]
    R: tuple[float, ...]
    correct: tuple[bool, ...]

    def __post_init__(self):
        if not (len(self.C) == len(self.R) == len(self.correct) >= 1):
            raise ValueError("a sample needs at least one candidate and equal-length fields")


@dataclass(frozen=True)
class KInterval:
    lo: float
    hi: float  # may be math.inf

    def contains(self, k: float) -> bool:
        return self.lo <= k <= self.hi


@dataclass(frozen=True)
class Calibration:
    k: float
    n_top: int
    count: int
    dataset_id: str
    flagged: bool = False


def envelope_breakpoints(sample: TrainingSample) -> list[float]:
    """Sorted positive ``k`` where two alternatives' lines cross."""
    C = np.asarray(sample.C, dtype=float)
    R = np.asarray(sample.R, dtype=float)
    dc = C[:, None] - C[None, :]
    dr = R[None, :] - R[:, None]
    with np.errstate(divide="ignore", invalid="ignore"):
        ks = dr / dc
    ks = ks[(dc != 0) & np.isfinite(ks) & (ks > 0)]
    return sorted(set(ks.tolist()))


def solved_at(sample: TrainingSample, k: float) -> bool:
    """Whether some correct alternative attains ``max_i C_i k + R_i``."""
    f = np.asarray(sample.C, dtype=float) * k + np.asarray(sample.R, dtype=float)
    best = f.max()
    ok = np.asarray(sample.correct, dtype=bool)
    return bool(ok.any() and f[ok].max() >= best)


def feasible_k_intervals(sample: TrainingSample) -> list[KInterval]:
    if not any(sample.correct):
        return []
    points = [0.0] + envelope_breakpoints(sample)
    # alternate breakpoints and the open gaps between them; a solved gap
    # implies solved endpoints, so every run starts and ends on a breakpoint
    pieces = []
    for i, p in enumerate(points):
        pieces.append((p, p, p))
        nxt = points[i + 1] if i + 1 < len(points) else math.inf
        probe = (p + nxt) / 2.0 if nxt < math.inf else p + 1.0
        pieces.append((probe, p, nxt))
    intervals: list[KInterval] = []
    start = end = None
    for probe, lo, hi in pieces:
        if solved_at(sample, probe):
            if start is None:
                start = lo
            end = hi
        elif start is not None:
            intervals.append(KInterval(start, end))
            start = None
    if start is not None:
        intervals.append(KInterval(start, end))
    return intervals


def optimize_k(interval_sets: Iterable[Sequence[KInterval]]) -> tuple[float, int, bool]:
    """Return ``(k, count, flagged)`` for per-sample interval lists.

    ``k`` lies in the widest region covered by the most intervals: its
    midpoint when bounded, ``lo + 1`` when unbounded, ``0`` when the region
    is all of ``[0, inf)``.  ``flagged`` is set when no sample is solvable.
    """
    events: list[tuple[float, int]] = []
    for intervals in interval_sets:
        for iv in intervals:
            events.append((iv.lo, 0))  # opening sorts before closing at equal k
            events.append((iv.hi, 1))
    if not events:
        return 0.0, 0, True
    events.sort()
    best_count, regions = 0, []
    active = 0
    i = 0
    while i < len(events):
        k = events[i][0]
        opens = closes = 0
        while i < len(events) and events[i][0] == k:
            if events[i][1] == 0:
                opens += 1
            else:
                closes += 1
            i += 1
        active += opens
        # [k, k] is covered by everything opened so far, closing ones included
        if active > best_count:
            best_count, regions = active, [(k, k)]
        elif active == best_count:
            regions.append((k, k))
        active -= closes
        nxt = events[i][0] if i < len(events) else math.inf
        if active > 0 and nxt > k:
            if active > best_count:
                best_count, regions = active, [(k, nxt)]
            elif active == best_count:
                regions.append((k, nxt))
    # merge touching regions of equal count
    merged: list[list[float]] = []
    for lo, hi in regions:
        if merged and lo <= merged[-1][1]:
            merged[-1][1] = max(merged[-1][1], hi)
        else:
            merged.append([lo, hi])
    lo, hi = max(merged, key=lambda r: r[1] - r[0])
    if math.isinf(hi):
        k = 0.0 if lo == 0.0 else lo + 1.0
    else:
        k = (lo + hi) / 2.0
    return k, best_count, False


def calibrate(samples: Iterable[TrainingSample]) -> tuple[float, int, bool]:
    return optimize_k(feasible_k_intervals(s) for s in samples)


def write_calibration(path, cal: Calibration) -> None:
    lines = [
        f"version={CALIBRATION_VERSION}",
        f"k={cal.k!r}",
        f"n_top={cal.n_top}",
        f"count={cal.count}",
        f"dataset_id={cal.dataset_id}",
    ]
    if cal.flagged:
        lines.append("flagged=no_feasible_sample")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def parse_calibration(text: str) -> Calibration:
    fields = {}
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ValueError(f"malformed calibration line: {raw!r}")
        fields[key.strip()] = value.strip()
    if int(fields.get("version", CALIBRATION_VERSION)) != CALIBRATION_VERSION:
        raise ValueError(f"unsupported calibration version {fields['version']}")
    return Calibration(
        k=float(fields["k"]),
        n_top=int(fields["n_top"]),
        count=int(fields.get("count", 0)),
        dataset_id=fields.get("dataset_id", ""),
        flagged="flagged" in fields,
    )


def read_calibration(path) -> Calibration:
    return parse_calibration(Path(path).read_text(encoding="utf-8"))


def default_calibration() -> Calibration:
    text = resources.files("docquad.data").joinpath("calibration.txt").read_text(encoding="utf-8")
    return parse_calibration(text)
