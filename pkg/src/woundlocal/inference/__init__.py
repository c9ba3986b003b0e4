"""Preprocessing, YOLO head decoding, NMS, and pluggable model backends."""
from .backends import Backend, BackendError, ReplayBackend, open_backend
from .config import (
    DEFAULT_CONF_THRESHOLD,
    DEFAULT_NMS_IOU_THRESHOLD,
    ConfigError,
    ModelConfig,
    builtin_models,
    tiny_yolov3,
    yolov3_416,
)
from .decode import DecodeError, Detection, HeadTensor, decode_head
from .letterbox import Letterbox, letterbox
from .nms import nms
from .pipeline import detect
from .tensorio import TensorFormatError, read_tensor, write_tensor

__all__ = [
    "Backend",
    "BackendError",
    "ConfigError",
    "DecodeError",
    "DEFAULT_CONF_THRESHOLD",
    "DEFAULT_NMS_IOU_THRESHOLD",
    "Detection",
    "HeadTensor",
    "Letterbox",
    "ModelConfig",
    "ReplayBackend",
    "TensorFormatError",
    "builtin_models",
    "decode_head",
    "detect",
    "letterbox",
    "nms",
    "open_backend",
    "read_tensor",
    "tiny_yolov3",
    "write_tensor",
    "yolov3_416",
]
