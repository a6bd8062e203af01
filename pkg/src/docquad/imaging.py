"""Image decoding, portrait normalization, working-resolution resampling
and color quantization.

Rasters are plain numpy arrays: RGB images are ``(height, width, 3)``
``uint8`` and gray images are ``(height, width)`` ``uint8``.  Continuous
image coordinates put pixel ``(i, j)`` on the square ``[i, i+1) x [j, j+1)``
so its center is ``(i + 0.5, j + 0.5)``.
"""

from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np
from PIL import Image, UnidentifiedImageError

from .errors import DecodeError

WORKING_WIDTH = 240
WORKING_HEIGHT = 427
HIST_BINS = 512

# Pillow modes that carry 8 bits per channel and convert losslessly to RGB.
_EIGHT_BIT_MODES = {"1", "L", "P", "RGB", "RGBA", "LA", "CMYK", "YCbCr", "PA", "RGBX"}


@dataclass(frozen=True, eq=False)
class WorkingImage:
    original: np.ndarray
    working_rgb: np.ndarray
    working_gray: np.ndarray
    scale_x: float
    scale_y: float
    rotated: bool

    @property
    def width(self) -> int:
        return self.working_rgb.shape[1]

    @property
    def height(self) -> int:
        return self.working_rgb.shape[0]

    def to_original(self, points) -> np.ndarray:
        """Map continuous working-frame points back to the original frame.

        Undoes the anisotropic scaling and, for landscape inputs, the
        clockwise portrait rotation.
        """
        pts = np.asarray(points, dtype=float).reshape(-1, 2)
        x = pts[:, 0] * self.scale_x
        y = pts[:, 1] * self.scale_y
        if self.rotated:
            orig_h = self.original.shape[0]
            x, y = y, orig_h - x
        return np.stack([x, y], axis=1)

    def to_working(self, points) -> np.ndarray:
        """Inverse of :meth:`to_original`."""
        pts = np.asarray(points, dtype=float).reshape(-1, 2)
        x, y = pts[:, 0], pts[:, 1]
        if self.rotated:
            orig_h = self.original.shape[0]
            x, y = orig_h - y, x
        return np.stack([x / self.scale_x, y / self.scale_y], axis=1)


def decode_image(data: bytes) -> np.ndarray:
    """Decode a PNG/JPEG (or other 8-bit Pillow-readable) byte stream to RGB."""
    try:
        with Image.open(io.BytesIO(data)) as img:
            if img.mode not in _EIGHT_BIT_MODES:
                raise DecodeError(f"unsupported pixel format {img.mode!r}")
            img.load()
            rgb = img.convert("RGB")
    except DecodeError:
        raise
    except (UnidentifiedImageError, OSError, SyntaxError, ValueError) as exc:
        raise DecodeError(str(exc)) from exc
    return np.asarray(rgb, dtype=np.uint8).copy()


def read_image(path) -> np.ndarray:
    with open(path, "rb") as fh:
        return decode_image(fh.read())


def to_gray(rgb: np.ndarray) -> np.ndarray:
    """BT.601 luma, rounded half up."""
    rgb = rgb.astype(np.float64)
    y = 0.299 * rgb[..., 0] + 0.587 * rgb[..., 1] + 0.114 * rgb[..., 2]
    return np.clip(np.floor(y + 0.5), 0, 255).astype(np.uint8)


def prepare_working(image: np.ndarray) -> WorkingImage:
    if image.ndim != 3 or image.shape[2] != 3 or image.shape[0] < 1 or image.shape[1] < 1:
        raise ValueError("expected a non-empty (H, W, 3) RGB array")
    rotated = image.shape[1] > image.shape[0]
    # clockwise: new[y, x] = old[H - 1 - x, y]
    portrait = np.ascontiguousarray(np.rot90(image, k=-1)) if rotated else image
    h, w = portrait.shape[:2]
    if (w, h) == (WORKING_WIDTH, WORKING_HEIGHT):
        working = portrait.astype(np.uint8, copy=True)
    else:
        resized = Image.fromarray(portrait.astype(np.uint8)).resize(
            (WORKING_WIDTH, WORKING_HEIGHT), resample=Image.BOX)
        working = np.asarray(resized, dtype=np.uint8).copy()
    return WorkingImage(
        original=image,
        working_rgb=working,
        working_gray=to_gray(working),
        scale_x=w / WORKING_WIDTH,
        scale_y=h / WORKING_HEIGHT,
        rotated=rotated,
    )


def quantize_color(pixel) -> int:
    r, g, b = (int(c) for c in pixel)
    return (r // 32) * 64 + (g // 32) * 8 + (b // 32)


def quantize_image(rgb: np.ndarray) -> np.ndarray:
    """Vectorized :func:`quantize_color` over an RGB raster."""
    q = rgb.astype(np.int32) >> 5
    return (q[..., 0] << 6) | (q[..., 1] << 3) | q[..., 2]
