"""Bounding-box representations, coordinate conversions, and IoU.

The canonical in-memory box is :class:`BBox`: normalized center format
(cx, cy, w, h) with every coordinate relative to the image, matching the
YOLO annotation convention. Pixel corner rectangles (:class:`PixelRect`)
exist only at format boundaries (VOC XML, drawing).

All types are immutable values and all operations are pure.
"""
from __future__ import annotations

from dataclasses import dataclass

# Tolerance for boxes whose edges were clamped to the image border by
# augmentation or decoding; absorbs float rounding at the boundary.
EDGE_TOL = 1e-6


class GeometryError(ValueError):
    """Raised when a box or rectangle violates its invariants."""


@dataclass(frozen=True)
class BBox:
    """Axis-aligned box in normalized center format.

    cx, cy are the box center, w, h its size, all in [0, 1] relative to
    the image. The box must lie inside the unit square up to EDGE_TOL.
    """

    cx: float
    cy: float
    w: float
    h: float

    def __post_init__(self) -> None:
        if not (self.w > 0.0 and self.h > 0.0):
            raise GeometryError(f"box size must be positive, got w={self.w} h={self.h}")
        if (
            self.cx - self.w / 2 < -EDGE_TOL
            or self.cx + self.w / 2 > 1.0 + EDGE_TOL
            or self.cy - self.h / 2 < -EDGE_TOL
            or self.cy + self.h / 2 > 1.0 + EDGE_TOL
        ):
            raise GeometryError(f"box extends outside the unit square: {self}")

    @property
    def corners(self) -> tuple[float, float, float, float]:
        """(xmin, ymin, xmax, ymax) in normalized coordinates."""
        return (
            self.cx - self.w / 2,
            self.cy - self.h / 2,
            self.cx + self.w / 2,
            self.cy + self.h / 2,
        )

    @property
    def area(self) -> float:
        return self.w * self.h


@dataclass(frozen=True)
class PixelRect:
    """Axis-aligned rectangle in pixel corner coordinates (origin top-left)."""

    xmin: float
    ymin: float
    xmax: float
    ymax: float

    def __post_init__(self) -> None:
        if not (self.xmin < self.xmax and self.ymin < self.ymax):
            raise GeometryError(f"degenerate rectangle: {self}")
        if self.xmin < 0 or self.ymin < 0:
            raise GeometryError(f"negative pixel coordinates: {self}")


def iou(a: BBox, b: BBox) -> float:
    """Intersection over union of two boxes; 0 when disjoint.

    Boxes touching only at an edge have intersection of measure zero and
    therefore IoU 0.
    """
    ax0, ay0, ax1, ay1 = a.corners
    bx0, by0, bx1, by1 = b.corners
    iw = min(ax1, bx1) - max(ax0, bx0)
    ih = min(ay1, by1) - max(ay0, by0)
    if iw <= 0.0 or ih <= 0.0:
        return 0.0
    inter = iw * ih
    # Areas from the same corner arithmetic as the intersection, so that
    # iou(a, a) is exactly 1.0 despite float rounding.
    union = (ax1 - ax0) * (ay1 - ay0) + (bx1 - bx0) * (by1 - by0) - inter
    return inter / union


def to_pixel(b: BBox, img_w: int, img_h: int) -> PixelRect:
    """Convert a normalized box to pixel corners on an img_w x img_h image."""
    _check_dims(img_w, img_h)
    xmin, ymin, xmax, ymax = b.corners
    # EDGE_TOL lets corners sit epsilon outside the unit square; clip so
    # the PixelRect invariants hold.
    return PixelRect(
        max(0.0, xmin * img_w),
        max(0.0, ymin * img_h),
        min(float(img_w), xmax * img_w),
        min(float(img_h), ymax * img_h),
    )


def from_pixel(r: PixelRect, img_w: int, img_h: int) -> BBox:
    """Convert pixel corners back to a normalized center-format box."""
    _check_dims(img_w, img_h)
    return BBox(
        cx=(r.xmin + r.xmax) / 2 / img_w,
        cy=(r.ymin + r.ymax) / 2 / img_h,
        w=(r.xmax - r.xmin) / img_w,
        h=(r.ymax - r.ymin) / img_h,
    )


def clamp_box(cx: float, cy: float, w: float, h: float) -> BBox | None:
    """Clip a raw center-format box to the unit square.

    Returns None when nothing of the box remains inside the image.
    """
    x0 = max(0.0, cx - w / 2)
    y0 = max(0.0, cy - h / 2)
    x1 = min(1.0, cx + w / 2)
    y1 = min(1.0, cy + h / 2)
    if x1 - x0 <= 0.0 or y1 - y0 <= 0.0:
        return None
    return BBox((x0 + x1) / 2, (y0 + y1) / 2, x1 - x0, y1 - y0)


def _check_dims(img_w: int, img_h: int) -> None:
    if img_w < 1 or img_h < 1:
        raise GeometryError(f"degenerate image dimensions {img_w}x{img_h}")
