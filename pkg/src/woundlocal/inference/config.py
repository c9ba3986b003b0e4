"""Model configuration: head geometry, anchor priors, thresholds.

Configs load from TOML files; two built-in models are registered:
yolov3-416 (strides 8/16/32, so 52/26/13 grids at 416 px) and
tiny-yolov3 (strides 16/32, grids 26/13).
"""
from __future__ import annotations

import sys
from dataclasses import dataclass
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib


class ConfigError(ValueError):
    """Raised for inconsistent or out-of-range model configuration."""


# Standard YOLOv3 anchor priors at 416-px network scale.
YOLOV3_ANCHORS: dict[int, tuple[tuple[float, float], ...]] = {
    8: ((10, 13), (16, 30), (33, 23)),
    16: ((30, 61), (62, 45), (59, 119)),
    32: ((116, 90), (156, 198), (373, 326)),
}
TINY_YOLOV3_ANCHORS: dict[int, tuple[tuple[float, float], ...]] = {
    16: ((10, 14), (23, 27), (37, 58)),
    32: ((81, 82), (135, 169), (344, 319)),
}

DEFAULT_CONF_THRESHOLD = 0.2
DEFAULT_NMS_IOU_THRESHOLD = 0.5


@dataclass(frozen=True)
class ModelConfig:
    name: str
    strides: tuple[int, ...]
    anchors: dict[int, tuple[tuple[float, float], ...]]
    net_w: int = 416
    net_h: int = 416
    num_classes: int = 1
    conf_threshold: float = DEFAULT_CONF_THRESHOLD
    nms_iou_threshold: float = DEFAULT_NMS_IOU_THRESHOLD
    # "product": score = sigmoid(objectness) * max class probability.
    # "objectness": score = sigmoid(objectness) alone.
    score_mode: str = "product"

    def __post_init__(self) -> None:
        if self.net_w % 32 or self.net_h % 32 or self.net_w < 32 or self.net_h < 32:
            raise ConfigError(f"network dims must be positive multiples of 32, got {self.net_w}x{self.net_h}")
        if not self.strides or any(s not in (8, 16, 32) for s in self.strides):
            raise ConfigError(f"strides must be from {{8, 16, 32}}, got {self.strides}")
        if tuple(sorted(set(self.strides))) != self.strides:
            raise ConfigError(f"strides must be sorted and unique, got {self.strides}")
        for s in self.strides:
            if s not in self.anchors or not self.anchors[s]:
                raise ConfigError(f"no anchors configured for stride {s}")
        if not 0.0 <= self.conf_threshold <= 1.0 or not 0.0 <= self.nms_iou_threshold <= 1.0:
            raise ConfigError("thresholds must lie in [0, 1]")
        if self.num_classes < 1:
            raise ConfigError(f"num_classes must be >= 1, got {self.num_classes}")
        if self.score_mode not in ("product", "objectness"):
            raise ConfigError(f"unknown score_mode {self.score_mode!r}")
        if self.name == "yolov3-416" and len(self.strides) != 3:
            raise ConfigError("yolov3-416 must have 3 head scales")
        if self.name == "tiny-yolov3" and len(self.strides) != 2:
            raise ConfigError("tiny-yolov3 must have 2 head scales")

    @property
    def grid_shapes(self) -> list[tuple[int, int]]:
        """(grid_h, grid_w) per head, finest first."""
        return [(self.net_h // s, self.net_w // s) for s in self.strides]

    def with_thresholds(self, conf: float | None = None, nms_iou: float | None = None) -> "ModelConfig":
        return ModelConfig(
            name=self.name,
            strides=self.strides,
            anchors=self.anchors,
            net_w=self.net_w,
            net_h=self.net_h,
            num_classes=self.num_classes,
            conf_threshold=self.conf_threshold if conf is None else conf,
            nms_iou_threshold=self.nms_iou_threshold if nms_iou is None else nms_iou,
            score_mode=self.score_mode,
        )

    @classmethod
    def from_toml(cls, path: str | Path) -> "ModelConfig":
        try:
            with open(path, "rb") as fh:
                data = tomllib.load(fh)
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"{path}: {exc}") from exc
        try:
            anchors = {
                int(stride): tuple((float(pw), float(ph)) for pw, ph in pairs)
                for stride, pairs in data.get("anchors", {}).items()
            }
            strides = tuple(int(s) for s in data["strides"])
            if not anchors:
                anchors = {s: YOLOV3_ANCHORS[s] for s in strides}
            return cls(
                name=str(data["name"]),
                strides=strides,
                anchors=anchors,
                net_w=int(data.get("net_w", 416)),
                net_h=int(data.get("net_h", 416)),
                num_classes=int(data.get("num_classes", 1)),
                conf_threshold=float(data.get("conf_threshold", DEFAULT_CONF_THRESHOLD)),
                nms_iou_threshold=float(data.get("nms_iou_threshold", DEFAULT_NMS_IOU_THRESHOLD)),
                score_mode=str(data.get("score_mode", "product")),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"{path}: {exc!r}") from exc


def yolov3_416() -> ModelConfig:
    return ModelConfig(name="yolov3-416", strides=(8, 16, 32), anchors=dict(YOLOV3_ANCHORS))


def tiny_yolov3() -> ModelConfig:
    return ModelConfig(name="tiny-yolov3", strides=(16, 32), anchors=dict(TINY_YOLOV3_ANCHORS))


def builtin_models() -> dict[str, ModelConfig]:
    return {"yolov3-416": yolov3_416(), "tiny-yolov3": tiny_yolov3()}
