"""Command-line front end: ``docquad detect | evaluate | calibrate``.

Exit codes: 0 success, 2 usage error or unreadable input, 3 image decode
failure, 4 too few lines to form a quadrilateral.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np
from PIL import Image, ImageDraw

from .calibration import Calibration, calibrate, default_calibration, read_calibration, write_calibration
from .detector import COMBINED, CONTOUR, DetectorConfig, detect
from .errors import DecodeError, ImageTooSmall
from .evaluation.datasets import SUBSETS, load_midv500, load_smartdoc, load_synthetic
from .evaluation.report import analyse_all, build_reports
from .imaging import decode_image

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DECODE = 3
EXIT_NO_LINES = 4

log = logging.getLogger("docquad")


def _fail(code: int, message: str) -> int:
    print(f"docquad: {message}", file=sys.stderr)
    return code


def _config(args, mode=None) -> DetectorConfig:
    cal = read_calibration(args.calibration) if args.calibration else default_calibration()
    k = args.k if args.k is not None else cal.k
    n_top = getattr(args, "n_top", None) or cal.n_top
    return DetectorConfig(n_top=n_top, k=k, mode=mode or args.mode)


def _num(v: float) -> str:
    return "undefined" if v != v else f"{v:.4f}"


def _fmt_quad(pts) -> str:
    return ";".join(f"{x:.3f},{y:.3f}" for x, y in np.asarray(pts).reshape(4, 2))


def _draw_overlay(image: np.ndarray, quad, path) -> None:
    im = Image.fromarray(image)
    draw = ImageDraw.Draw(im)
    pts = [tuple(p) for p in np.asarray(quad.array())]
    draw.line(pts + [pts[0]], fill=(255, 0, 0), width=2)
    im.save(path, format="PNG")


def run_detect(args) -> int:
    path = Path(args.image)
    try:
        data = path.read_bytes()
    except OSError as exc:
        return _fail(EXIT_USAGE, f"cannot read {path}: {exc.strerror or exc}")
    try:
        image = decode_image(data)
    except DecodeError as exc:
        return _fail(EXIT_DECODE, f"cannot decode {path}: {exc}")
    cfg = _config(args)
    try:
        result = detect(image, cfg)
    except ImageTooSmall as exc:
        return _fail(EXIT_DECODE, f"image too small: {exc}")
    if result.failed:
        return _fail(EXIT_NO_LINES, f"not enough lines to form a quadrilateral in {path}")

    working = result.working
    lines = [f"image={path} mode={args.mode} k={cfg.k!r}"]
    for i, (x, y) in enumerate(result.best.array()):
        lines.append(f"vertex index={i} x={x:.3f} y={y:.3f}")
    for rank, alt in enumerate(result.alternatives, start=1):
        quad = working.to_original(alt.quad.array())
        lines.append(f"alternative rank={rank} C={alt.C:.6f} R={alt.R:.6f} F={alt.F:.6f} "
                     f"quad={_fmt_quad(quad)}")
    text = "\n".join(lines) + "\n"
    sys.stdout.write(text)
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
    if args.overlay:
        _draw_overlay(image, result.best, args.overlay)
    return EXIT_OK


def _load(args):
    if args.kind == "synthetic":
        return load_synthetic(args.frames, args.adversarial, args.seed)
    if not args.root:
        raise FileNotFoundError("--root is required for this dataset kind")
    loader = load_midv500 if args.kind == "midv500" else load_smartdoc
    return loader(args.root)


def _annotations(args):
    ds = _load(args)
    anns = ds.subset(args.subset) if args.subset else ds.annotations
    return ds, anns


def run_evaluate(args) -> int:
    try:
        ds, anns = _annotations(args)
    except (FileNotFoundError, NotADirectoryError, PermissionError) as exc:
        return _fail(EXIT_USAGE, f"cannot read dataset: {exc}")
    cfg = _config(args)
    reports = build_reports(ds.name, analyse_all(anns, cfg, args.jobs), ds.skipped)
    report = reports[cfg.mode]
    if args.output:
        Path(args.output).write_text(report.text(), encoding="utf-8")
    agg = report.aggregate()
    print(f"dataset={ds.name} mode={cfg.mode} frames={agg['frames']} skipped={ds.skipped} "
          f"accuracy={_num(agg['accuracy'])} mean_ji={_num(agg['mean_ji'])} "
          f"mean_mask_ji={_num(agg['mean_mask_ji'])}")
    print("errors " + " ".join(f"{k}={v}" for k, v in agg.items() if k.startswith("class_")))
    for group in report.groups():
        g = report.aggregate(group=group)
        print(f"group={group} frames={g['frames']} accuracy={_num(g['accuracy'])}")
    return EXIT_OK


def run_calibrate(args) -> int:
    try:
        ds, anns = _annotations(args)
    except (FileNotFoundError, NotADirectoryError, PermissionError) as exc:
        return _fail(EXIT_USAGE, f"cannot read dataset: {exc}")
    cfg = DetectorConfig(n_top=args.n_top, k=1.0, mode=CONTOUR)
    samples = [a.sample for a in analyse_all(anns, cfg, args.jobs) if a.sample is not None]
    if not samples:
        return _fail(EXIT_USAGE, "no frame yielded candidates; nothing to calibrate")
    k, count, flagged = calibrate(samples)
    cal = Calibration(k=k, n_top=args.n_top, count=count, dataset_id=ds.name, flagged=flagged)
    write_calibration(args.output, cal)
    print(f"k={k!r} count={count} samples={len(samples)} n_top={args.n_top}"
          + (" flagged=no_feasible_sample" if flagged else ""))
    return EXIT_OK


def _dataset_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--kind", choices=("midv500", "smartdoc", "synthetic"), required=True)
    p.add_argument("--root", help="dataset root directory (midv500, smartdoc)")
    p.add_argument("--subset", choices=SUBSETS, help="restrict to frames with 4 / at least 3 vertices in frame")
    p.add_argument("--jobs", type=int, default=1, help="worker processes (results do not depend on it)")
    p.add_argument("--seed", type=int, default=0, help="synthetic benchmark seed")
    p.add_argument("--frames", type=int, default=200, help="synthetic benchmark size")
    p.add_argument("--adversarial", type=int, default=50, help="adversarial frames in the synthetic benchmark")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="docquad", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("detect", help="find the document quadrilateral in one image")
    p.add_argument("image")
    p.add_argument("--mode", choices=(CONTOUR, COMBINED), default=COMBINED)
    p.add_argument("--k", type=float, help="combination coefficient (default: calibration file)")
    p.add_argument("--n-top", type=int, help="alternatives re-ranked and listed")
    p.add_argument("--calibration", help="calibration file to read k and n_top from")
    p.add_argument("--output", help="also write the structured result here")
    p.add_argument("--overlay", help="PNG with the winning quad drawn on the input")
    p.set_defaults(func=run_detect)

    p = sub.add_parser("evaluate", help="score the detector on a dataset")
    _dataset_flags(p)
    p.add_argument("--mode", choices=(CONTOUR, COMBINED), default=COMBINED)
    p.add_argument("--k", type=float)
    p.add_argument("--calibration")
    p.add_argument("--output", help="write the per-frame report here")
    p.set_defaults(func=run_evaluate)

    p = sub.add_parser("calibrate", help="fit k on a dataset and write a calibration file")
    _dataset_flags(p)
    p.add_argument("--n-top", type=int, default=11)
    p.add_argument("--output", required=True, help="calibration file to write")
    p.set_defaults(func=run_calibrate)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if getattr(args, "jobs", 1) < 1:
        return _fail(EXIT_USAGE, "--jobs must be at least 1")
    if getattr(args, "n_top", None) is not None and args.n_top < 1:
        return _fail(EXIT_USAGE, "--n-top must be at least 1")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
