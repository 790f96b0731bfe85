"""Screenshot decoding, grayscale conversion, and Sobel gradients.

The readability metric needs the mean Sobel magnitude over text crops.
Everything here is pure over immutable buffers; callers may fan regions
across threads.
"""
from __future__ import annotations

import io
import math
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

from .errors import DecodeError, EmptyRegion, IoError
from .model import Rect

# Largest possible per-pixel Sobel magnitude: both kernels peak at 4*255,
# and the magnitude of the pair is sqrt(2) times that.
SOBEL_MAX_MAGNITUDE = math.sqrt(2.0) * 4.0 * 255.0

SOBEL_X = np.array([[-1, 0, 1], [-2, 0, 2], [-1, 0, 1]], dtype=np.float64)
SOBEL_Y = np.array([[-1, -2, -1], [0, 0, 0], [1, 2, 1]], dtype=np.float64)


class Channels(str, Enum):
    GRAY8 = "gray8"
    RGB8 = "rgb8"
    RGBA8 = "rgba8"


_CHANNEL_COUNT = {Channels.GRAY8: 1, Channels.RGB8: 3, Channels.RGBA8: 4}


@dataclass(frozen=True)
class RasterImage:
    """Decoded image; pixels row-major uint8, shape (h, w, channels)."""

    width: int
    height: int
    channels: Channels
    pixels: np.ndarray

    def __post_init__(self):
        expect = (self.height, self.width, _CHANNEL_COUNT[self.channels])
        if self.pixels.shape != expect or self.pixels.dtype != np.uint8:
            raise ValueError(f"pixel buffer must be uint8 with shape {expect}")


@dataclass(frozen=True)
class GrayImage:
    """8-bit intensity image, shape (h, w)."""

    width: int
    height: int
    pixels: np.ndarray

    def __post_init__(self):
        if self.pixels.shape != (self.height, self.width) or self.pixels.dtype != np.uint8:
            raise ValueError("intensity buffer must be uint8 with shape (h, w)")


def load_raster(path: str | Path) -> RasterImage:
    """Decode a PNG file; alpha is preserved when present."""
    p = Path(path)
    try:
        data = p.read_bytes()
    except OSError as exc:
        raise IoError(f"cannot read {p}: {exc}") from exc
    try:
        with Image.open(io.BytesIO(data)) as im:
            if im.format != "PNG":
                raise DecodeError(f"{p} is not a PNG file (format={im.format})")
            if im.mode in ("RGBA", "LA", "PA"):
                im = im.convert("RGBA")
                channels = Channels.RGBA8
            elif im.mode == "L":
                channels = Channels.GRAY8
            else:
                im = im.convert("RGB")
                channels = Channels.RGB8
            arr = np.asarray(im, dtype=np.uint8)
    except (UnidentifiedImageError, OSError, SyntaxError, ValueError) as exc:
        raise DecodeError(f"cannot decode {p}: {exc}") from exc
    h, w = arr.shape[:2]
    arr = arr.reshape(h, w, _CHANNEL_COUNT[channels])
    return RasterImage(width=w, height=h, channels=channels, pixels=arr)


def to_grayscale(img: RasterImage) -> GrayImage:
    """BT.601 luma; alpha composites over white before conversion."""
    px = img.pixels.astype(np.float64)
    if img.channels == Channels.GRAY8:
        gray = px[:, :, 0]
    else:
        if img.channels == Channels.RGBA8:
            alpha = px[:, :, 3:4] / 255.0
            rgb = px[:, :, :3] * alpha + 255.0 * (1.0 - alpha)
        else:
            rgb = px[:, :, :3]
        gray = 0.299 * rgb[:, :, 0] + 0.587 * rgb[:, :, 1] + 0.114 * rgb[:, :, 2]
    # half-up rounding keeps results platform independent
    out = np.floor(gray + 0.5).clip(0, 255).astype(np.uint8)
    return GrayImage(width=img.width, height=img.height, pixels=out)


def _round_half_away(v: float) -> int:
    return int(math.floor(v + 0.5)) if v >= 0 else int(math.ceil(v - 0.5))


def clip_region(img: GrayImage, region: Rect) -> tuple[int, int, int, int]:
    """Snap a region to the pixel grid and clip to the image.

    Returns (x0, y0, x1, y1); raises EmptyRegion when nothing remains.
    """
    x0 = max(0, _round_half_away(region.x))
    y0 = max(0, _round_half_away(region.y))
    x1 = min(img.width, _round_half_away(region.x + region.w))
    y1 = min(img.height, _round_half_away(region.y + region.h))
    if x1 <= x0 or y1 <= y0:
        raise EmptyRegion(f"region {region} does not intersect a {img.width}x{img.height} image")
    return x0, y0, x1, y1


def interior_pixel_count(img: GrayImage, region: Rect) -> int:
    """Pixels the Sobel mean will cover (crop minus its 1px border ring)."""
    try:
        x0, y0, x1, y1 = clip_region(img, region)
    except EmptyRegion:
        return 0
    cw, ch = x1 - x0, y1 - y0
    if cw < 3 or ch < 3:
        return 0
    return (cw - 2) * (ch - 2)


def sobel_mean_magnitude(img: GrayImage, region: Rect) -> float:
    """Mean Sobel gradient magnitude over a crop's interior pixels.

    The 1px border ring of the crop is excluded so no synthetic edge
    gradients leak in; crops thinner than 3px contribute 0.
    """
    x0, y0, x1, y1 = clip_region(img, region)
    crop = img.pixels[y0:y1, x0:x1].astype(np.float64)
    ch, cw = crop.shape
    if cw < 3 or ch < 3:
        return 0.0
    gx = (
        -crop[:-2, :-2] + crop[:-2, 2:]
        - 2.0 * crop[1:-1, :-2] + 2.0 * crop[1:-1, 2:]
        - crop[2:, :-2] + crop[2:, 2:]
    )
    gy = (
        -crop[:-2, :-2] - 2.0 * crop[:-2, 1:-1] - crop[:-2, 2:]
        + crop[2:, :-2] + 2.0 * crop[2:, 1:-1] + crop[2:, 2:]
    )
    return float(np.mean(np.sqrt(gx * gx + gy * gy)))
