"""YOLO head decoding: raw output grids to scored boxes.

Per cell (i, j) and anchor (pw, ph), the raw (tx, ty, tw, th, t_obj,
class logits) decode as

    bx = (j + sigmoid(tx)) * stride        bw = pw * exp(tw)
    by = (i + sigmoid(ty)) * stride        bh = ph * exp(th)

in canvas pixels, then normalize by the network dims. The detection
score is sigmoid(t_obj) * max_c sigmoid(class_c) (configurable to
objectness only); cells below the confidence threshold are dropped.
All math is float32.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..geometry import BBox, clamp_box
from .config import ModelConfig


class DecodeError(ValueError):
    """Raised when a head tensor disagrees with the model config."""


@dataclass(frozen=True)
class HeadTensor:
    """One raw output grid: values[grid_h][grid_w][num_anchors][5 + C]."""

    stride: int
    anchors: tuple[tuple[float, float], ...]
    values: np.ndarray

    def __post_init__(self) -> None:
        v = self.values
        if v.ndim != 4:
            raise DecodeError(f"head tensor must be rank 4, got shape {v.shape}")
        if v.shape[2] != len(self.anchors):
            raise DecodeError(f"tensor has {v.shape[2]} anchor slots but {len(self.anchors)} anchors configured")
        if v.shape[3] < 6:
            raise DecodeError(f"last dim must be 5 + C >= 6, got {v.shape[3]}")

    @property
    def grid_h(self) -> int:
        return self.values.shape[0]

    @property
    def grid_w(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class Detection:
    """A scored predicted box, normalized to its reference image."""

    bbox: BBox
    class_id: int
    score: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.score <= 1.0:
            raise DecodeError(f"score must lie in [0, 1], got {self.score}")


def _sigmoid(x: np.ndarray) -> np.ndarray:
    # Split by sign to stay overflow-free in float32.
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def decode_head(head: HeadTensor, cfg: ModelConfig) -> list[Detection]:
    """Decode one head to canvas-normalized detections, pre-NMS.

    Output order is row-major over (cell row, cell column, anchor), which
    keeps downstream tie-breaking deterministic. Boxes are clipped to the
    canvas.
    """
    gh, gw = head.grid_h, head.grid_w
    if gh != cfg.net_h // head.stride or gw != cfg.net_w // head.stride:
        raise DecodeError(
            f"stride-{head.stride} head is {gh}x{gw}, expected "
            f"{cfg.net_h // head.stride}x{cfg.net_w // head.stride} for a {cfg.net_w}x{cfg.net_h} net"
        )
    if head.values.shape[3] != 5 + cfg.num_classes:
        raise DecodeError(f"last dim {head.values.shape[3]} != 5 + {cfg.num_classes} classes")

    v = np.asarray(head.values, dtype=np.float32)
    sig_xy = _sigmoid(v[..., 0:2])
    obj = _sigmoid(v[..., 4])
    cls = _sigmoid(v[..., 5:])
    cls_best = np.argmax(cls, axis=-1)
    cls_prob = np.max(cls, axis=-1)
    score = obj * cls_prob if cfg.score_mode == "product" else obj

    stride = np.float32(head.stride)
    net_w = np.float32(cfg.net_w)
    net_h = np.float32(cfg.net_h)
    jj = np.arange(gw, dtype=np.float32)[None, :, None]
    ii = np.arange(gh, dtype=np.float32)[:, None, None]
    bx = (jj + sig_xy[..., 0]) * stride / net_w
    by = (ii + sig_xy[..., 1]) * stride / net_h
    pw = np.array([a[0] for a in head.anchors], dtype=np.float32)[None, None, :]
    ph = np.array([a[1] for a in head.anchors], dtype=np.float32)[None, None, :]
    bw = pw * np.exp(v[..., 2]) / net_w
    bh = ph * np.exp(v[..., 3]) / net_h

    dets: list[Detection] = []
    for i, j, a in np.argwhere(score >= cfg.conf_threshold):
        box = clamp_box(float(bx[i, j, a]), float(by[i, j, a]), float(bw[i, j, a]), float(bh[i, j, a]))
        if box is None:
            continue
        dets.append(Detection(box, int(cls_best[i, j, a]), float(score[i, j, a])))
    return dets
