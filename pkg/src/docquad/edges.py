"""Orientation-split Sobel edge maps and directional Gaussian blur."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.ndimage import convolve1d

from .errors import ImageTooSmall

# Largest |grad| a 3x3 Sobel pair can produce on 8-bit input; attained by
# e.g. [[0, 0, 255], [0, *, 255], [0, 255, 255]] with gx = 1020, gy = 510.
SOBEL_MAX = 255.0 * math.sqrt(20.0)


@dataclass(frozen=True, eq=False)
class DirectionalEdgeMaps:
    """Edge intensities in [0, 1]: ``horizontal`` holds mostly-horizontal
    edges (|gy| >= |gx|), ``vertical`` the rest."""

    horizontal: np.ndarray
    vertical: np.ndarray

    @property
    def shape(self):
        return self.horizontal.shape


def sobel(gray: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(gx, gy)`` with clamped borders."""
    p = np.pad(gray.astype(np.float64), 1, mode="edge")
    tl, tc, tr = p[:-2, :-2], p[:-2, 1:-1], p[:-2, 2:]
    ml, mr = p[1:-1, :-2], p[1:-1, 2:]
    bl, bc, br = p[2:, :-2], p[2:, 1:-1], p[2:, 2:]
    gx = (tr + 2.0 * mr + br) - (tl + 2.0 * ml + bl)
    gy = (bl + 2.0 * bc + br) - (tl + 2.0 * tc + tr)
    return gx, gy


def extract_directional_edges(gray: np.ndarray) -> DirectionalEdgeMaps:
    if gray.ndim != 2 or min(gray.shape) < 3:
        raise ImageTooSmall(f"edge extraction needs at least 3x3 pixels, got {gray.shape}")
    gx, gy = sobel(gray)
    mag = np.hypot(gx, gy) / SOBEL_MAX
    horiz = np.abs(gy) >= np.abs(gx)
    return DirectionalEdgeMaps(
        horizontal=np.where(horiz, mag, 0.0),
        vertical=np.where(horiz, 0.0, mag),
    )


def gaussian_kernel(sigma: float) -> np.ndarray:
    radius = int(math.floor(3.0 * sigma))
    x = np.arange(-radius, radius + 1, dtype=np.float64)
    return np.exp(-0.5 * (x / sigma) ** 2)


def blur_along_gradient(maps: DirectionalEdgeMaps, sigma: float = 1.5) -> DirectionalEdgeMaps:
    """Blur each map across its edges: vertically for the horizontal-edge map,
    horizontally for the vertical-edge map."""
    kernel = gaussian_kernel(sigma)
    kernel = kernel / kernel.sum()
    return DirectionalEdgeMaps(
        horizontal=convolve1d(maps.horizontal, kernel, axis=0, mode="nearest"),
        vertical=convolve1d(maps.vertical, kernel, axis=1, mode="nearest"),
    )
