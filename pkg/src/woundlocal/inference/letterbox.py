"""Aspect-preserving resize onto the fixed network canvas."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from PIL import Image

from ..augment import RasterImage
from .config import ConfigError

FILL_GRAY = 128


@dataclass(frozen=True)
class Letterbox:
    """Recorded mapping from original-image pixels to canvas pixels."""

    scale: float
    pad_x: float
    pad_y: float
    orig_w: int
    orig_h: int
    net_w: int
    net_h: int

    def to_canvas(self, x: float, y: float) -> tuple[float, float]:
        return x * self.scale + self.pad_x, y * self.scale + self.pad_y

    def to_original(self, x: float, y: float) -> tuple[float, float]:
        return (x - self.pad_x) / self.scale, (y - self.pad_y) / self.scale


def letterbox(img: RasterImage, net_w: int, net_h: int) -> tuple[RasterImage, Letterbox]:
    """Resize onto a gray canvas, centered, preserving aspect ratio."""
    if net_w % 32 or net_h % 32 or net_w < 32 or net_h < 32:
        raise ConfigError(f"network dims must be positive multiples of 32, got {net_w}x{net_h}")
    scale = min(net_w / img.width, net_h / img.height)
    new_w = max(1, round(img.width * scale))
    new_h = max(1, round(img.height * scale))
    pad_x = (net_w - new_w) // 2
    pad_y = (net_h - new_h) // 2

    if (new_w, new_h) == (img.width, img.height):
        resized = img.pixels
    else:
        pil = Image.fromarray(img.pixels, mode="RGB").resize((new_w, new_h), Image.BILINEAR)
        resized = np.asarray(pil, dtype=np.uint8)

    canvas = np.full((net_h, net_w, 3), FILL_GRAY, dtype=np.uint8)
    canvas[pad_y : pad_y + new_h, pad_x : pad_x + new_w] = resized
    return RasterImage(canvas), Letterbox(scale, float(pad_x), float(pad_y), img.width, img.height, net_w, net_h)
