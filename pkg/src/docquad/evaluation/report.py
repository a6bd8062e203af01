"""Run the detector over a dataset and aggregate the results.

Each frame goes through the pipeline once; the contour-mode and
combined-mode winners are both read off the same top-N alternatives, and
the same pass yields the frame's calibration sample.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ..calibration import TrainingSample
from ..detector import COMBINED, CONTOUR, DetectorConfig, edge_maps, find_lines, top_alternatives
from ..errors import DecodeError, ImageTooSmall, NotEnoughLines
from ..geometry import Quad, rasterize_mask
from ..imaging import prepare_working
from .datasets import SUBSETS, Annotation
from .metrics import CLASS_NONE, ERROR_CLASSES, classify_error, is_correct_ji, safe_jaccard

MODES = (CONTOUR, COMBINED)


@dataclass(frozen=True)
class FrameOutcome:
    frame_id: str
    ji: float
    correct: bool
    error_class: str
    mask_ji: float
    failed: bool = False
    subsets: tuple[str, ...] = ()
    group: str = ""


@dataclass(frozen=True)
class FrameAnalysis:
    outcomes: dict[str, FrameOutcome]
    sample: TrainingSample | None


def _iou(a, b) -> float:
    union = np.count_nonzero(a | b)
    return 1.0 if union == 0 else np.count_nonzero(a & b) / union


def _mask_ji(q: Quad | None, m: Quad, size) -> float:
    w, h = size
    mm = rasterize_mask(m, w, h)
    mq = rasterize_mask(q, w, h) if q is not None else np.zeros_like(mm)
    return 0.5 * (_iou(mq, mm) + _iou(~mq, ~mm))


def analyse_frame(ann: Annotation, cfg: DetectorConfig) -> FrameAnalysis:
    """Outcome of ``ann`` under both ranking modes plus its training sample."""
    lines_h, lines_v, alternatives = [], [], []
    working = None
    try:
        working = prepare_working(ann.load_image())
        alternatives, lines_h, lines_v = top_alternatives(working, cfg)
    except NotEnoughLines:
        lines_h, lines_v = find_lines(edge_maps(working, cfg), cfg)
    except (DecodeError, ImageTooSmall, OSError):
        pass

    outcomes = {}
    for mode in MODES:
        if alternatives:
            key = (lambda a: -a.C) if mode == CONTOUR else (lambda a: -(cfg.k * a.C + a.R))
            winner = sorted(alternatives, key=key)[0]
            q = Quad.from_array(working.to_original(winner.quad.array()))
        else:
            q = None
        ji = safe_jaccard(q, ann.quad, ann.template)
        correct = is_correct_ji(ji)
        if correct:
            cls = CLASS_NONE
        elif working is None:
            cls = classify_error(ann.quad.array(), ann.frame_size, [], [])
        else:
            m_working = working.to_working(ann.quad.array())
            cls = classify_error(m_working, (working.width, working.height), lines_h, lines_v)
        outcomes[mode] = FrameOutcome(ann.frame_id, ji, correct, cls, _mask_ji(q, ann.quad, ann.frame_size),
                                      failed=q is None, subsets=ann.subsets, group=ann.group)

    sample = None
    if alternatives:
        original_quads = [Quad.from_array(working.to_original(a.quad.array())) for a in alternatives]
        sample = TrainingSample(tuple(a.C for a in alternatives), tuple(a.R for a in alternatives),
                                tuple(is_correct_ji(safe_jaccard(q, ann.quad, ann.template))
                                      for q in original_quads))
    return FrameAnalysis(outcomes, sample)


def _analyse(args):
    return analyse_frame(*args)


def analyse_all(annotations, cfg: DetectorConfig, jobs: int = 1) -> list[FrameAnalysis]:
    """Per-frame analyses in input order, whatever the number of workers."""
    work = [(a, cfg) for a in annotations]
    if jobs <= 1 or len(work) < 2:
        return [_analyse(w) for w in work]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_analyse, work, chunksize=max(1, len(work) // (4 * jobs))))


@dataclass
class EvalReport:
    dataset: str
    mode: str
    frames: list[FrameOutcome] = field(default_factory=list)
    skipped: int = 0

    def aggregate(self, subset: str | None = None, group: str | None = None) -> dict:
        sel = [f for f in self.frames
               if (subset is None or subset in f.subsets) and (group is None or f.group == group)]
        n = len(sel)
        correct = sum(f.correct for f in sel)
        agg = {
            "frames": n,
            "correct": correct,
            "accuracy": correct / n if n else math.nan,
            "mean_ji": float(np.mean([f.ji for f in sel])) if n else math.nan,
            "mean_mask_ji": float(np.mean([f.mask_ji for f in sel])) if n else math.nan,
            "failures": sum(f.failed for f in sel),
        }
        for cls in ERROR_CLASSES:
            agg[f"class_{cls}"] = sum(f.error_class == cls for f in sel)
        return agg

    @property
    def accuracy(self) -> float:
        return self.aggregate()["accuracy"]

    def groups(self) -> list[str]:
        return sorted({f.group for f in self.frames if f.group})

    def lines(self) -> list[str]:
        out = [f"report dataset={self.dataset} mode={self.mode} frames={len(self.frames)} skipped={self.skipped}"]
        if not self.frames:
            out.append("flag=accuracy_undefined")
        for f in self.frames:
            out.append(f"frame id={f.frame_id} correct={int(f.correct)} ji={f.ji:.6f} "
                       f"mask_ji={f.mask_ji:.6f} class={f.error_class} failed={int(f.failed)}")
        scopes = [("subset", s) for s in SUBSETS] + [("group", g) for g in self.groups()]
        for kind, name in scopes:
            agg = self.aggregate(**{kind: name})
            fields = " ".join(f"{k}={_fmt(v)}" for k, v in agg.items())
            out.append(f"aggregate {kind}={name} {fields}")
        return out

    def text(self) -> str:
        return "\n".join(self.lines()) + "\n"


def _fmt(v) -> str:
    if isinstance(v, float):
        return "undefined" if math.isnan(v) else f"{v:.6f}"
    return str(v)


def build_reports(dataset: str, analyses, skipped: int = 0) -> dict[str, EvalReport]:
    return {mode: EvalReport(dataset, mode, [a.outcomes[mode] for a in analyses], skipped) for mode in MODES}


def evaluate(annotations, cfg: DetectorConfig, jobs: int = 1, dataset: str = "", skipped: int = 0) -> EvalReport:
    """Report for ``cfg.mode`` over ``annotations``."""
    return build_reports(dataset, analyse_all(annotations, cfg, jobs), skipped)[cfg.mode]
