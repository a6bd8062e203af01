"""Dataset ingestion for MIDV-500, SmartDoc and the synthetic benchmark.

MIDV-500 layout (as distributed)::

    <root>/<NN_doctype>/ground_truth/<NN_doctype>.json      template quad
    <root>/<NN_doctype>/ground_truth/<clip>/<clip>_NN.json  {"quad": [[x, y] * 4]}
    <root>/<NN_doctype>/images/<clip>/<clip>_NN.tif

SmartDoc layout: ``<root>/background0N/<clip>.gt.xml`` with one ``frame``
element per frame holding ``tl``/``tr``/``br``/``bl`` points, and frames
extracted to ``<root>/background0N/<clip>/<index:03d>.(png|jpg|jpeg)``.
"""

from __future__ import annotations

import json
import logging
import re
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from PIL import Image

from ..errors import MalformedAnnotation, MissingAnnotation
from ..geometry import Quad, Template
from ..imaging import read_image

log = logging.getLogger(__name__)

MIDV_TEMPLATES = (Template(856, 540), Template(1050, 740), Template(1250, 880))
SMARTDOC_TEMPLATE = Template(840, 1188)
SUBSET_4IN, SUBSET_3IN, SUBSET_FULL = "4in", "3in", "full"
SUBSETS = (SUBSET_4IN, SUBSET_3IN, SUBSET_FULL)
IMAGE_SUFFIXES = (".tif", ".tiff", ".png", ".jpg", ".jpeg")


@dataclass(eq=False)
class Annotation:
    """Ground truth for one frame.  ``quad`` is in original image
    coordinates and may reach outside the frame."""

    frame_id: str
    quad: Quad
    template: Template
    frame_size: tuple[int, int]
    image_path: Path | None = None
    image: np.ndarray | None = field(default=None, repr=False)
    subsets: tuple[str, ...] = (SUBSET_FULL,)
    group: str = ""

    def load_image(self) -> np.ndarray:
        if self.image is not None:
            return self.image
        return read_image(self.image_path)


@dataclass
class LoadedDataset:
    annotations: list[Annotation]
    skipped: int = 0
    name: str = ""

    def subset(self, name: str) -> list[Annotation]:
        if name not in SUBSETS:
            raise ValueError(f"unknown subset {name!r}; expected one of {', '.join(SUBSETS)}")
        return [a for a in self.annotations if name in a.subsets]


def vertices_in_frame(quad: Quad, frame_size) -> int:
    w, h = frame_size
    pts = quad.array()
    return int(np.count_nonzero((pts[:, 0] >= 0) & (pts[:, 0] <= w) & (pts[:, 1] >= 0) & (pts[:, 1] <= h)))


def subsets_for(quad: Quad, frame_size) -> tuple[str, ...]:
    n = vertices_in_frame(quad, frame_size)
    labels = [SUBSET_FULL]
    if n >= 3:
        labels.append(SUBSET_3IN)
    if n == 4:
        labels.append(SUBSET_4IN)
    return tuple(labels)


def parse_quad(values, where: str = "") -> Quad:
    try:
        pts = np.asarray(values, dtype=float)
    except (TypeError, ValueError) as exc:
        raise MalformedAnnotation(f"{where}: quad is not numeric") from exc
    if pts.shape != (4, 2) or not np.all(np.isfinite(pts)):
        raise MalformedAnnotation(f"{where}: expected 4 finite (x, y) vertices, got shape {pts.shape}")
    return Quad.from_array(pts)


def snap_template(width: float, height: float, choices=MIDV_TEMPLATES) -> Template:
    """Declared template closest to a measured ``width x height``, allowing
    for either orientation."""
    def dist(t):
        return min(abs(t.width - width) + abs(t.height - height),
                   abs(t.height - width) + abs(t.width - height))
    best = min(choices, key=dist)
    if width < height:
        return Template(min(best.width, best.height), max(best.width, best.height))
    return Template(max(best.width, best.height), min(best.width, best.height))


def _read_json(path: Path) -> dict:
    if not path.is_file():
        raise MissingAnnotation(str(path))
    try:
        return json.loads(path.read_text(encoding="utf-8"))
    except (OSError, ValueError) as exc:
        raise MalformedAnnotation(f"{path}: {exc}") from exc


def _image_size(path: Path) -> tuple[int, int]:
    with Image.open(path) as im:
        return im.size


def _find_image(stem: Path) -> Path | None:
    for suffix in IMAGE_SUFFIXES:
        p = stem.with_suffix(suffix)
        if p.is_file():
            return p
    return None


def _midv_template(doc_dir: Path) -> Template:
    gt = _read_json(doc_dir / "ground_truth" / f"{doc_dir.name}.json")
    pts = parse_quad(gt.get("quad"), doc_dir.name).array()
    width = np.linalg.norm(pts[1] - pts[0])
    height = np.linalg.norm(pts[3] - pts[0])
    return snap_template(width, height)


def load_midv500(root) -> LoadedDataset:
    root = Path(root)
    if not root.is_dir():
        raise FileNotFoundError(f"cannot read dataset root {root}")
    annotations, skipped = [], 0
    for doc_dir in sorted(p for p in root.iterdir() if (p / "images").is_dir()):
        try:
            template = _midv_template(doc_dir)
        except (MissingAnnotation, MalformedAnnotation) as exc:
            log.warning("skipping document %s: %s", doc_dir.name, exc)
            skipped += sum(1 for _ in (doc_dir / "images").glob("*/*"))
            continue
        for clip_dir in sorted(p for p in (doc_dir / "images").iterdir() if p.is_dir()):
            for image_path in sorted(clip_dir.iterdir()):
                if image_path.suffix.lower() not in IMAGE_SUFFIXES:
                    continue
                gt_path = doc_dir / "ground_truth" / clip_dir.name / f"{image_path.stem}.json"
                frame_id = f"{doc_dir.name}/{clip_dir.name}/{image_path.stem}"
                try:
                    quad = parse_quad(_read_json(gt_path).get("quad"), str(gt_path))
                    size = _image_size(image_path)
                except (MissingAnnotation, MalformedAnnotation) as exc:
                    log.warning("skipping frame %s: %s", frame_id, exc)
                    skipped += 1
                    continue
                annotations.append(Annotation(frame_id, quad, template, size, image_path,
                                              subsets=subsets_for(quad, size), group=doc_dir.name))
    return LoadedDataset(annotations, skipped, "midv500")


_BACKGROUND = re.compile(r"^background0*(\d+)$")
_CORNERS = ("tl", "tr", "br", "bl")


def background_index(name: str) -> int:
    m = _BACKGROUND.match(name)
    if not m or not 1 <= int(m.group(1)) <= 5:
        raise MalformedAnnotation(f"not a background directory in 1-5: {name!r}")
    return int(m.group(1))


def parse_smartdoc_gt(path) -> dict[int, Quad]:
    """Frame index -> ground-truth quad from a ``.gt.xml`` file."""
    try:
        tree = ET.parse(path)
    except (OSError, ET.ParseError) as exc:
        raise MalformedAnnotation(f"{path}: {exc}") from exc
    quads = {}
    for frame in tree.getroot().iter("frame"):
        if frame.get("rejected", "false").lower() == "true":
            continue
        try:
            index = int(frame.get("index"))
            points = {p.get("name"): (float(p.get("x")), float(p.get("y"))) for p in frame.iter("point")}
            quads[index] = parse_quad([points[c] for c in _CORNERS], f"{path}#{index}")
        except (TypeError, ValueError, KeyError) as exc:
            raise MalformedAnnotation(f"{path}: bad frame element: {exc}") from exc
    return quads


def load_smartdoc(root) -> LoadedDataset:
    root = Path(root)
    if not root.is_dir():
        raise FileNotFoundError(f"cannot read dataset root {root}")
    annotations, skipped = [], 0
    for bg_dir in sorted(p for p in root.iterdir() if p.is_dir()):
        bg = background_index(bg_dir.name)
        for gt_path in sorted(bg_dir.glob("*.gt.xml")):
            clip = gt_path.name[: -len(".gt.xml")]
            try:
                quads = parse_smartdoc_gt(gt_path)
            except MalformedAnnotation as exc:
                log.warning("skipping clip %s: %s", gt_path, exc)
                skipped += 1
                continue
            for index, quad in sorted(quads.items()):
                frame_id = f"background{bg:02d}/{clip}/{index:03d}"
                image_path = _find_image(bg_dir / clip / f"{index:03d}")
                if image_path is None:
                    log.warning("skipping frame %s: image missing", frame_id)
                    skipped += 1
                    continue
                size = _image_size(image_path)
                annotations.append(Annotation(frame_id, quad, SMARTDOC_TEMPLATE, size, image_path,
                                              subsets=subsets_for(quad, size), group=f"background{bg:02d}"))
    return LoadedDataset(annotations, skipped, "smartdoc")


def group_by_background(ds: LoadedDataset) -> dict[str, list[Annotation]]:
    groups: dict[str, list[Annotation]] = {}
    for a in ds.annotations:
        groups.setdefault(a.group, []).append(a)
    return groups


def load_synthetic(n_frames: int = 200, n_adversarial: int = 50, seed: int = 0) -> LoadedDataset:
    from .synthetic import synthetic_benchmark

    annotations = []
    for f in synthetic_benchmark(n_frames, n_adversarial, seed):
        size = (f.image.shape[1], f.image.shape[0])
        annotations.append(Annotation(f.frame_id, f.quad, f.template, size, image=f.image,
                                      subsets=subsets_for(f.quad, size),
                                      group="adversarial" if f.adversarial else "plain"))
    return LoadedDataset(annotations, 0, f"synthetic-seed-{seed}")
