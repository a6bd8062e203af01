"""Synthetic benchmark: perspective-distorted documents on plain backgrounds.

Every scene is a 240x427 RGB frame holding one convex quadrilateral whose
sides keep ``|tangent| <= 0.35`` to their axis and whose luminance differs
from the background by at least 40 levels.  Adversarial scenes add two
straight distractors: a line crossing the background outside the document
and a crisp printed rule running across the document parallel to its top or
bottom side, inset by 7-11% of its height and 1.1-1.8 times as contrasted
as the document border.  The quad that swaps the true side for the rule
scores well on edges alone but has little color contrast along the swapped
side.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..geometry import Quad, Template, rasterize_polygon
from ..imaging import WORKING_HEIGHT, WORKING_WIDTH

TEMPLATES = (Template(856, 540), Template(1050, 740), Template(1250, 880))
SUPERSAMPLE = 2
MIN_GAP = 40
MAX_TILT = 0.35
ADV_LO, ADV_HI = 1.1, 1.8


@dataclass(frozen=True, eq=False)
class SyntheticFrame:
    frame_id: str
    image: np.ndarray
    quad: Quad
    template: Template
    adversarial: bool


def _luma(rgb) -> float:
    r, g, b = rgb
    return 0.299 * r + 0.587 * g + 0.114 * b


def _tilt_ok(pts: np.ndarray, limit: float) -> bool:
    for a, b, horizontal in ((0, 1, True), (1, 2, False), (2, 3, True), (3, 0, False)):
        dx, dy = pts[b] - pts[a]
        major, minor = (dx, dy) if horizontal else (dy, dx)
        if major == 0 or abs(minor / major) > limit:
            return False
    return True


def _random_quad(rng, width, height, margin, y_range=(0.38, 0.62), h_range=(0.22, 0.33)):
    while True:
        cx = rng.uniform(0.40, 0.60) * width
        cy = rng.uniform(*y_range) * height
        hw = rng.uniform(0.25, 0.36) * width
        hh = rng.uniform(*h_range) * height
        base = np.array([[cx - hw, cy - hh], [cx + hw, cy - hh], [cx + hw, cy + hh], [cx - hw, cy + hh]])
        angle = rng.uniform(-0.2, 0.2)
        rot = np.array([[np.cos(angle), -np.sin(angle)], [np.sin(angle), np.cos(angle)]])
        pts = (base - [cx, cy]) @ rot.T + [cx, cy]
        pts = pts + rng.uniform(-0.06, 0.06, size=(4, 2)) * [width, height] * 0.5
        if (pts.min() < margin or pts[:, 0].max() > width - margin
                or pts[:, 1].max() > height - margin):
            continue
        if _tilt_ok(pts, MAX_TILT):
            return pts


def _colors(rng):
    bg_luma = rng.uniform(50, 205)
    gap = rng.uniform(MIN_GAP + 5, 110)
    doc_luma = bg_luma + gap if (bg_luma + gap <= 250 and rng.random() < 0.5) or bg_luma - gap < 5 else bg_luma - gap
    while True:
        bg = np.clip(bg_luma + rng.normal(0, 18, 3), 0, 255)
        doc = np.clip(doc_luma + rng.normal(0, 18, 3), 0, 255)
        if abs(_luma(doc) - _luma(bg)) >= MIN_GAP:
            return bg, doc, abs(_luma(doc) - _luma(bg))


def render_scene(rng: np.random.Generator, adversarial: bool = False, frame_id: str = "",
                 noise: float = 3.0, rule_contrast=(ADV_LO, ADV_HI)) -> SyntheticFrame:
    """Render one scene; ``rule_contrast`` bounds the printed rule's
    contrast against the document as a multiple of the border contrast."""
    s = SUPERSAMPLE
    width, height = WORKING_WIDTH, WORKING_HEIGHT
    pts = _random_quad(rng, width, height, 8.0)
    bg, doc, gap = _colors(rng)

    hi = np.empty((height * s, width * s, 3))
    hi[:] = bg
    yy, xx = np.mgrid[0:height * s, 0:width * s] / s
    # gentle illumination gradient
    shade = 1.0 + 0.06 * ((xx - width / 2) / width) + 0.06 * ((yy - height / 2) / height)

    if adversarial:
        ink = np.clip(bg - np.sign(_luma(bg) - 128) * gap * rng.uniform(0.5, 0.8), 0, 255)
        left, right = pts[:, 0].min(), pts[:, 0].max()
        if left > width - right:
            x_line = rng.uniform(3, left - 3)
        else:
            x_line = rng.uniform(right + 3, width - 3)
        line_x = x_line + rng.uniform(-0.03, 0.03) * (yy - height / 2)
        hi[np.abs(xx - line_x) < 1.0] = ink

    inside = rasterize_polygon(pts * s, width * s, height * s)
    hi[inside] = doc
    # faint interior texture standing in for printed content
    for _ in range(rng.integers(2, 6)):
        u, v = rng.uniform(0.15, 0.85, 2)
        du, dv = rng.uniform(0.05, 0.25), rng.uniform(0.01, 0.05)
        block = pts[0] + (pts[1] - pts[0]) * u + (pts[3] - pts[0]) * v
        corners = np.array([block, block + (pts[1] - pts[0]) * du,
                            block + (pts[1] - pts[0]) * du + (pts[3] - pts[0]) * dv,
                            block + (pts[3] - pts[0]) * dv])
        m = rasterize_polygon(corners * s, width * s, height * s) & inside
        hi[m] = np.clip(doc - np.sign(_luma(doc) - 128) * 18, 0, 255)

    if adversarial:
        inset = rng.uniform(0.07, 0.11)
        if rng.random() < 0.5:
            a0, a1 = pts[0] + (pts[3] - pts[0]) * inset, pts[1] + (pts[2] - pts[1]) * inset
        else:
            a0, a1 = pts[3] + (pts[0] - pts[3]) * inset, pts[2] + (pts[1] - pts[2]) * inset
        normal = np.array([-(a1 - a0)[1], (a1 - a0)[0]]) / np.linalg.norm(a1 - a0)
        rule = np.array([a0 - normal * 0.8, a1 - normal * 0.8, a1 + normal * 0.8, a0 + normal * 0.8])
        m = rasterize_polygon(rule * s, width * s, height * s) & inside
        hi[m] = np.clip(doc - np.sign(_luma(doc) - 128) * gap * rng.uniform(*rule_contrast), 0, 255)

    hi *= shade[..., None]
    img = hi.reshape(height, s, width, s, 3).mean(axis=(1, 3))
    img += rng.normal(0, noise, img.shape)
    image = np.clip(np.floor(img + 0.5), 0, 255).astype(np.uint8)
    template = TEMPLATES[rng.integers(len(TEMPLATES))]
    # documents stand in portrait orientation
    template = Template(template.height, template.width)
    return SyntheticFrame(frame_id, image, Quad.from_array(pts), template, adversarial)


def synthetic_benchmark(n_frames: int = 200, n_adversarial: int = 50, seed: int = 0):
    """Deterministic benchmark; adversarial frames are spread evenly."""
    rng = np.random.default_rng(seed)
    adv_every = n_frames / n_adversarial if n_adversarial else None
    adv_slots = {int(i * adv_every) for i in range(n_adversarial)} if adv_every else set()
    return [render_scene(rng, adversarial=i in adv_slots, frame_id=f"synthetic_{seed}_{i:04d}")
            for i in range(n_frames)]


EXAMPLE_SEED = 36
EXAMPLE_RULE_CONTRAST = (1.4, 2.0)


def adversarial_example() -> SyntheticFrame:
    """A fixed adversarial scene whose best contour candidate is built on the
    printed rule while the true outline comes second."""
    return render_scene(np.random.default_rng(EXAMPLE_SEED), adversarial=True,
                        frame_id="adversarial_example", rule_contrast=EXAMPLE_RULE_CONTRAST)
