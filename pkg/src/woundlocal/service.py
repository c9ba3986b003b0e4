"""HTTP API mirroring the mobile app surface: photo/live detection and settings.

Live mode is simply repeated POST /api/detect per frame; every request is
stateless apart from the process-scoped Settings, which are swapped
atomically so a concurrent detect sees either the old or the new values.
"""
from __future__ import annotations

import io
import os
import threading
import time
from pathlib import Path

import numpy as np
from fastapi import FastAPI, Query, Request, UploadFile
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from PIL import Image, UnidentifiedImageError
from pydantic import BaseModel, Field

from .annotations import ClassMap
from .augment import RasterImage
from .inference import (
    Backend,
    BackendError,
    DEFAULT_CONF_THRESHOLD,
    DEFAULT_NMS_IOU_THRESHOLD,
    ModelConfig,
    builtin_models,
    detect,
)

DEFAULT_MAX_UPLOAD_BYTES = 8 * 1024 * 1024
TOKEN_ENV_VAR = "WOUNDLOCAL_TOKEN"


class Settings(BaseModel):
    model: str = "yolov3-416"
    conf_threshold: float = Field(default=DEFAULT_CONF_THRESHOLD, ge=0.0, le=1.0)
    nms_iou_threshold: float = Field(default=DEFAULT_NMS_IOU_THRESHOLD, ge=0.0, le=1.0)


def _error(status: int, code: str, message: str) -> JSONResponse:
    return JSONResponse(status_code=status, content={"code": code, "message": message})


def create_app(
    backend: Backend | None = None,
    models: dict[str, ModelConfig] | None = None,
    classes: ClassMap | None = None,
    settings: Settings | None = None,
    max_upload_bytes: int = DEFAULT_MAX_UPLOAD_BYTES,
    token: str | None = None,
) -> FastAPI:
    models = models or builtin_models()
    classes = classes or ClassMap()
    token = token if token is not None else os.environ.get(TOKEN_ENV_VAR)

    app = FastAPI(title="woundlocal")
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )

    state = app.state
    state.settings = settings or Settings()
    state.settings_lock = threading.Lock()
    state.backend = backend
    state.backend_lock = threading.Lock()
    state.started_at = time.monotonic()
    if state.settings.model not in models:
        raise ValueError(f"default model {state.settings.model!r} not in registry {sorted(models)}")

    @app.middleware("http")
    async def check_token(request: Request, call_next):
        if token and request.url.path.startswith("/api/") and request.url.path != "/api/health":
            header = request.headers.get("authorization", "")
            if header != f"Bearer {token}":
                return _error(401, "unauthorized", "missing or invalid bearer token")
        return await call_next(request)

    @app.get("/api/health")
    def health() -> dict:
        return {
            "status": "ok" if state.backend is not None else "degraded",
            "backend": getattr(state.backend, "name", None),
            "uptime_s": time.monotonic() - state.started_at,
        }

    @app.get("/api/models")
    def list_models() -> list[dict]:
        return [
            {
                "name": cfg.name,
                "net_w": cfg.net_w,
                "net_h": cfg.net_h,
                "strides": list(cfg.strides),
                "grids": [list(shape) for shape in cfg.grid_shapes],
            }
            for cfg in models.values()
        ]

    @app.get("/api/settings")
    def get_settings() -> Settings:
        return state.settings

    @app.put("/api/settings")
    def put_settings(new: Settings):
        if new.model not in models:
            return _error(422, "unknown_model", f"unknown model {new.model!r}; known: {sorted(models)}")
        with state.settings_lock:
            state.settings = new
        return new

    @app.post("/api/detect")
    async def detect_image(
        image: UploadFile,
        conf: float | None = Query(default=None, ge=0.0, le=1.0),
        nms_iou: float | None = Query(default=None, ge=0.0, le=1.0),
        model: str | None = Query(default=None),
    ):
        if state.backend is None:
            return _error(503, "backend_unavailable", "no model backend configured")
        data = await image.read()
        if len(data) > max_upload_bytes:
            return _error(413, "too_large", f"image is {len(data)} bytes; limit {max_upload_bytes}")
        try:
            with Image.open(io.BytesIO(data)) as im:
                raster = RasterImage(np.asarray(im.convert("RGB"), dtype=np.uint8))
        except (UnidentifiedImageError, OSError, ValueError):
            return _error(400, "bad_image", "request body is not a decodable JPEG/PNG image")

        current = state.settings
        model_name = model if model is not None else current.model
        if model_name not in models:
            return _error(422, "unknown_model", f"unknown model {model_name!r}; known: {sorted(models)}")
        cfg = models[model_name].with_thresholds(
            conf=conf if conf is not None else current.conf_threshold,
            nms_iou=nms_iou if nms_iou is not None else current.nms_iou_threshold,
        )
        image_id = Path(image.filename or "upload").stem

        start = time.perf_counter()
        try:
            if getattr(state.backend, "thread_safe", False):
                detections = detect(raster, state.backend, cfg, image_id)
            else:
                with state.backend_lock:
                    detections = detect(raster, state.backend, cfg, image_id)
        except BackendError as exc:
            return _error(503, "backend_error", str(exc))
        elapsed_ms = (time.perf_counter() - start) * 1000.0

        return {
            "image_id": image_id,
            "model": model_name,
            "elapsed_ms": elapsed_ms,
            "detections": [
                {
                    "class_name": classes.name_of(d.class_id),
                    "score": round(d.score, 6),
                    "cx": round(d.bbox.cx, 6),
                    "cy": round(d.bbox.cy, 6),
                    "w": round(d.bbox.w, 6),
                    "h": round(d.bbox.h, 6),
                }
                for d in detections
            ],
        }

    return app
