"""Deterministic image + bounding-box augmentations.

Ops: right-angle rotations (exact pixel permutations), arbitrary-angle
rotation (lossy: boxes become axis-aligned hulls), horizontal/vertical
flips, and box-filter blur. All transforms are seedless and pure:
identical inputs give byte-identical outputs.

Rotation angles are clockwise.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image
from scipy.ndimage import uniform_filter

from .annotations import ImageAnnotation
from .geometry import BBox, clamp_box


class AugmentError(ValueError):
    """Raised for out-of-range augmentation parameters."""


@dataclass(frozen=True)
class RasterImage:
    """8-bit RGB raster, row-major (height, width, 3)."""

    pixels: np.ndarray

    def __post_init__(self) -> None:
        if self.pixels.ndim != 3 or self.pixels.shape[2] != 3 or self.pixels.dtype != np.uint8:
            raise AugmentError(f"expected (h, w, 3) uint8 pixels, got {self.pixels.shape} {self.pixels.dtype}")

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @classmethod
    def from_file(cls, path: str | Path) -> "RasterImage":
        with Image.open(path) as im:
            return cls(np.asarray(im.convert("RGB"), dtype=np.uint8))

    def to_file(self, path: str | Path) -> None:
        # Always PNG on write so blurred/rotated pixels survive losslessly.
        Image.fromarray(self.pixels, mode="RGB").save(path, format="PNG")


def flip_right(img: RasterImage, boxes: list[BBox]) -> tuple[RasterImage, list[BBox]]:
    """Horizontal mirror; cx -> 1 - cx."""
    out = RasterImage(np.ascontiguousarray(img.pixels[:, ::-1]))
    return out, [BBox(1.0 - b.cx, b.cy, b.w, b.h) for b in boxes]


def flip_up(img: RasterImage, boxes: list[BBox]) -> tuple[RasterImage, list[BBox]]:
    """Vertical mirror; cy -> 1 - cy."""
    out = RasterImage(np.ascontiguousarray(img.pixels[::-1]))
    return out, [BBox(b.cx, 1.0 - b.cy, b.w, b.h) for b in boxes]


def rotate(img: RasterImage, boxes: list[BBox], theta: float) -> tuple[RasterImage, list[BBox]]:
    """Rotate clockwise by theta degrees, theta in (0, 360).

    90/180/270 are exact pixel permutations with exact box maps. Any other
    angle rotates about the center onto an enlarged black canvas; each box
    becomes the clamped axis-aligned hull of its four rotated corners.
    """
    if not 0.0 < theta < 360.0:
        raise AugmentError(f"rotation angle must be in (0, 360), got {theta}")
    if theta == 90.0:
        out = RasterImage(np.ascontiguousarray(np.rot90(img.pixels, k=-1)))
        return out, [BBox(1.0 - b.cy, b.cx, b.h, b.w) for b in boxes]
    if theta == 180.0:
        out = RasterImage(np.ascontiguousarray(np.rot90(img.pixels, k=2)))
        return out, [BBox(1.0 - b.cx, 1.0 - b.cy, b.w, b.h) for b in boxes]
    if theta == 270.0:
        out = RasterImage(np.ascontiguousarray(np.rot90(img.pixels, k=1)))
        return out, [BBox(b.cy, 1.0 - b.cx, b.h, b.w) for b in boxes]
    return _rotate_arbitrary(img, boxes, theta)


def _rotate_arbitrary(img: RasterImage, boxes: list[BBox], theta: float) -> tuple[RasterImage, list[BBox]]:
    # PIL rotates counterclockwise for positive angles; our theta is clockwise.
    pil = Image.fromarray(img.pixels, mode="RGB")
    rotated = pil.rotate(-theta, resample=Image.BILINEAR, expand=True, fillcolor=(0, 0, 0))
    out = RasterImage(np.asarray(rotated, dtype=np.uint8))

    rad = math.radians(theta)
    cos_t, sin_t = math.cos(rad), math.sin(rad)
    w_in, h_in = img.width, img.height
    w_out, h_out = out.width, out.height

    mapped: list[BBox] = []
    for b in boxes:
        xmin, ymin, xmax, ymax = b.corners
        xs, ys = [], []
        for x, y in ((xmin, ymin), (xmin, ymax), (xmax, ymin), (xmax, ymax)):
            # To pixels, rotate about the input center, re-center on the
            # enlarged output canvas. Clockwise in y-down image coords.
            px, py = x * w_in - w_in / 2, y * h_in - h_in / 2
            qx = cos_t * px - sin_t * py + w_out / 2
            qy = sin_t * px + cos_t * py + h_out / 2
            xs.append(qx / w_out)
            ys.append(qy / h_out)
        clamped = clamp_box(
            (min(xs) + max(xs)) / 2,
            (min(ys) + max(ys)) / 2,
            max(xs) - min(xs),
            max(ys) - min(ys),
        )
        if clamped is None:  # cannot happen: the canvas contains the rotation
            raise AugmentError("rotated box fell outside the enlarged canvas")
        mapped.append(clamped)
    return out, mapped


def blur(img: RasterImage, boxes: list[BBox], radius: int) -> tuple[RasterImage, list[BBox]]:
    """Box-filter blur with a normalized (2*radius+1)^2 kernel, edge-clamped.

    Geometric identity: the box list is returned unchanged.
    """
    if radius < 1:
        raise AugmentError(f"blur radius must be >= 1, got {radius}")
    size = 2 * radius + 1
    blurred = uniform_filter(img.pixels.astype(np.float64), size=(size, size, 1), mode="nearest")
    return RasterImage(np.rint(blurred).astype(np.uint8)), boxes


@dataclass(frozen=True)
class AugmentSpec:
    """One deterministic augmentation: op name plus optional parameter."""

    op: str
    param: float | None = None

    KNOWN_OPS = ("rot90", "rot180", "rot270", "rot", "flip_up", "flip_right", "blur")

    def __post_init__(self) -> None:
        if self.op not in self.KNOWN_OPS:
            raise AugmentError(f"unknown augmentation op {self.op!r}; known: {self.KNOWN_OPS}")
        if self.op == "rot" and (self.param is None or not 0.0 < self.param < 360.0):
            raise AugmentError(f"rot requires an angle in (0, 360), got {self.param}")
        if self.op == "blur" and (self.param is None or self.param < 1):
            raise AugmentError(f"blur requires a radius >= 1, got {self.param}")

    @classmethod
    def parse(cls, text: str) -> "AugmentSpec":
        """Parse 'rot90', 'flip_up', 'blur:2', 'rot:33.5'."""
        op, _, arg = text.strip().partition(":")
        return cls(op, float(arg) if arg else None)

    @property
    def id_suffix(self) -> str:
        if self.op == "rot":
            return f"__rot{self.param:g}"
        if self.op == "blur":
            return f"__blur{self.param:g}"
        return f"__{self.op.replace('_', '')}"

    def apply(self, img: RasterImage, boxes: list[BBox]) -> tuple[RasterImage, list[BBox]]:
        if self.op == "flip_right":
            return flip_right(img, boxes)
        if self.op == "flip_up":
            return flip_up(img, boxes)
        if self.op == "blur":
            return blur(img, boxes, int(self.param))
        if self.op == "rot":
            return rotate(img, boxes, self.param)
        return rotate(img, boxes, float(self.op[3:]))


def expand_dataset(
    items: list[tuple[RasterImage, ImageAnnotation]],
    specs: list[AugmentSpec],
) -> list[tuple[RasterImage, ImageAnnotation]]:
    """Each original plus one derived entry per spec; |out| == |in| * (1 + |specs|)."""
    out: list[tuple[RasterImage, ImageAnnotation]] = []
    for img, ann in items:
        out.append((img, ann))
        for spec in specs:
            try:
                new_img, new_boxes = spec.apply(img, [b for _, b in ann.boxes])
            except AugmentError as exc:
                raise AugmentError(f"{ann.image_id}: {exc}") from exc
            class_ids = [cid for cid, _ in ann.boxes]
            out.append(
                (
                    new_img,
                    ImageAnnotation(
                        ann.image_id + spec.id_suffix,
                        new_img.width,
                        new_img.height,
                        tuple(zip(class_ids, new_boxes)),
                    ),
                )
            )
    return out
