"""Greedy per-class non-maximum suppression.

Detections are visited in descending score order (ties broken by input
index); each kept box suppresses remaining same-class boxes whose IoU
with it is *strictly greater* than the threshold. A threshold of 1.00
therefore suppresses nothing, since IoU never exceeds 1.
"""
from __future__ import annotations

from ..geometry import iou
from .decode import Detection


def nms(dets: list[Detection], iou_threshold: float) -> list[Detection]:
    if not 0.0 <= iou_threshold <= 1.0:
        raise ValueError(f"NMS IoU threshold must lie in [0, 1], got {iou_threshold}")
    order = sorted(range(len(dets)), key=lambda i: (-dets[i].score, i))
    suppressed = [False] * len(dets)
    keep: list[Detection] = []
    for pos, i in enumerate(order):
        if suppressed[i]:
            continue
        keep.append(dets[i])
        for j in order[pos + 1 :]:
            if suppressed[j] or dets[j].class_id != dets[i].class_id:
                continue
            if iou(dets[i].bbox, dets[j].bbox) > iou_threshold:
                suppressed[j] = True
    return keep
