"""Full detection pipeline: letterbox, backend, decode, NMS, unmap."""
from __future__ import annotations

from ..augment import RasterImage
from ..geometry import clamp_box
from .backends import Backend, BackendError
from .config import ModelConfig
from .decode import DecodeError, Detection, HeadTensor, decode_head
from .letterbox import letterbox
from .nms import nms


def detect(img: RasterImage, backend: Backend, cfg: ModelConfig, image_id: str = "") -> list[Detection]:
    """Detect objects in an image; boxes come back in original-image coordinates.

    Deterministic for a given (image, backend tensors, config): decode
    order, NMS tie-breaking, and the final score-descending sort are all
    fixed.
    """
    canvas, lb = letterbox(img, cfg.net_w, cfg.net_h)
    try:
        raw = backend.run(canvas, image_id)
    except BackendError as exc:
        raise BackendError(f"backend {getattr(backend, 'name', backend)!r} failed for {image_id!r}: {exc}") from exc

    missing = [s for s in cfg.strides if s not in raw]
    if missing:
        raise DecodeError(f"backend returned no tensors for strides {missing} (model {cfg.name})")

    dets: list[Detection] = []
    for stride in cfg.strides:
        head = HeadTensor(stride=stride, anchors=tuple(cfg.anchors[stride]), values=raw[stride])
        dets.extend(decode_head(head, cfg))
    dets = nms(dets, cfg.nms_iou_threshold)

    out: list[Detection] = []
    for d in dets:
        xmin, ymin, xmax, ymax = d.bbox.corners
        x0, y0 = lb.to_original(xmin * cfg.net_w, ymin * cfg.net_h)
        x1, y1 = lb.to_original(xmax * cfg.net_w, ymax * cfg.net_h)
        box = clamp_box(
            (x0 + x1) / 2 / lb.orig_w,
            (y0 + y1) / 2 / lb.orig_h,
            (x1 - x0) / lb.orig_w,
            (y1 - y0) / lb.orig_h,
        )
        if box is None:  # the detection lived entirely in the padding
            continue
        out.append(Detection(box, d.class_id, d.score))
    return out
