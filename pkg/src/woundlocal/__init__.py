"""Wound-localization detection toolkit.

Library surface: bounding-box geometry and IoU, YOLO/VOC annotation
interchange, deterministic augmentation, YOLO head decoding with NMS,
and a precision/recall/F1/mAP evaluation stack. A CLI (`woundlocal`)
and an HTTP service expose the same pipeline.
"""
from .geometry import BBox, GeometryError, PixelRect, from_pixel, iou, to_pixel

__version__ = "0.1.0"

__all__ = [
    "BBox",
    "GeometryError",
    "PixelRect",
    "from_pixel",
    "iou",
    "to_pixel",
    "__version__",
]
