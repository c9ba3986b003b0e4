"""Model backend contract and the deterministic tensor-replay backend.

A backend turns a letterboxed canvas into raw head tensors. The replay
backend substitutes a real neural runtime with pre-recorded WLT1 files,
named "{image_id}.stride{N}.wlt1", one per head. It is read-only and
safe to share across threads; live backends may hold session state and
then require one instance per worker.
"""
from __future__ import annotations

from pathlib import Path
from typing import Protocol

import numpy as np

from ..augment import RasterImage
from .tensorio import read_tensor


class BackendError(RuntimeError):
    """Raised when a backend cannot produce tensors for a request."""


class Backend(Protocol):
    name: str

    def run(self, canvas: RasterImage, image_id: str) -> dict[int, np.ndarray]:
        """Return raw head values keyed by stride."""
        ...


class ReplayBackend:
    """Serves committed head tensors byte-exactly, keyed by image id."""

    thread_safe = True  # read-only; live backends default to exclusive access

    def __init__(self, tensor_dir: str | Path):
        self.dir = Path(tensor_dir)
        if not self.dir.is_dir():
            raise BackendError(f"replay tensor directory not found: {self.dir}")
        self.name = f"replay:{self.dir}"

    def run(self, canvas: RasterImage, image_id: str) -> dict[int, np.ndarray]:
        heads: dict[int, np.ndarray] = {}
        for path in sorted(self.dir.glob(f"{image_id}.stride*.wlt1")):
            stride_txt = path.name[len(image_id) + len(".stride") : -len(".wlt1")]
            try:
                stride = int(stride_txt)
            except ValueError:
                continue
            heads[stride] = read_tensor(path)
        if not heads:
            raise BackendError(f"no replay tensors for image id {image_id!r} in {self.dir}")
        return heads


def open_backend(spec: str) -> Backend:
    """Resolve a backend from a "kind:argument" string (currently replay:DIR)."""
    kind, _, arg = spec.partition(":")
    if kind == "replay" and arg:
        return ReplayBackend(arg)
    raise BackendError(f"unknown backend spec {spec!r}; expected replay:DIR")
