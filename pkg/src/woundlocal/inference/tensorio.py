"""WLT1 tensor file format.

Layout: magic bytes "WLT1", u32 little-endian rank, `rank` u32 dims,
then the row-major float32 little-endian payload. Round-trips are
bit-exact.
"""
from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

MAGIC = b"WLT1"


class TensorFormatError(ValueError):
    """Raised for corrupt or truncated WLT1 files."""


def write_tensor(path: str | Path, values: np.ndarray) -> None:
    arr = np.ascontiguousarray(values, dtype="<f4")
    header = MAGIC + struct.pack("<I", arr.ndim) + struct.pack(f"<{arr.ndim}I", *arr.shape)
    Path(path).write_bytes(header + arr.tobytes())


def read_tensor(path: str | Path) -> np.ndarray:
    data = Path(path).read_bytes()
    if data[:4] != MAGIC:
        raise TensorFormatError(f"{path}: bad magic {data[:4]!r}")
    if len(data) < 8:
        raise TensorFormatError(f"{path}: truncated header")
    (rank,) = struct.unpack_from("<I", data, 4)
    if len(data) < 8 + 4 * rank:
        raise TensorFormatError(f"{path}: truncated dims (rank {rank})")
    dims = struct.unpack_from(f"<{rank}I", data, 8)
    payload = data[8 + 4 * rank :]
    expected = 4 * int(np.prod(dims)) if rank else 4
    if len(payload) != expected:
        raise TensorFormatError(f"{path}: payload is {len(payload)} bytes, expected {expected} for dims {dims}")
    return np.frombuffer(payload, dtype="<f4").reshape(dims).copy()
