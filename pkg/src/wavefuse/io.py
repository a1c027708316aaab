"""
TensorFile (.wmt) binary format and 8-bit image ingestion.

TensorFile layout, all little-endian:
    b"WMT1" | u32 rank | rank x u32 dims | float32 payload (row-major)
"""

from __future__ import annotations

import os
import struct
from pathlib import Path

import numpy as np

from .errors import DataError, ShapeError

MAGIC = b"WMT1"
MAX_RANK = 4
_U32_MAX = 0xFFFFFFFF


def write_tensor(path, x: np.ndarray) -> None:
    x = np.asarray(x)
    if not 1 <= x.ndim <= MAX_RANK:
        raise ShapeError(f"TensorFile rank must lie in 1..{MAX_RANK}, got {x.ndim}")
    if any(d > _U32_MAX for d in x.shape):
        raise ShapeError(f"dimension does not fit in u32: {x.shape}")
    header = MAGIC + struct.pack(f"<I{x.ndim}I", x.ndim, *x.shape)
    payload = np.ascontiguousarray(x, dtype="<f4").tobytes()
    tmp = Path(str(path) + ".tmp")
    with open(tmp, "wb") as f:
        f.write(header)
        f.write(payload)
    os.replace(tmp, path)


def read_tensor(path) -> np.ndarray:
    data = Path(path).read_bytes()
    if len(data) < 8 or data[:4] != MAGIC:
        raise DataError(f"{path}: bad magic, not a TensorFile")
    (rank,) = struct.unpack_from("<I", data, 4)
    if not 1 <= rank <= MAX_RANK:
        raise DataError(f"{path}: rank {rank} outside 1..{MAX_RANK}")
    head = 8 + 4 * rank
    if len(data) < head:
        raise DataError(f"{path}: truncated header")
    dims = struct.unpack_from(f"<{rank}I", data, 8)
    count = 1
    for d in dims:
        count *= d
    if len(data) - head != 4 * count:
        raise DataError(f"{path}: payload is {len(data) - head} bytes, dims {dims} need {4 * count}")
    arr = np.frombuffer(data, dtype="<f4", offset=head, count=count).reshape(dims)
    return arr.astype(np.float32)


def tensor_roundtrip(x: np.ndarray, path) -> np.ndarray:
    write_tensor(path, x)
    return read_tensor(path)


IMAGE_SUFFIXES = (".png", ".pgm", ".ppm")


def load_image(path) -> np.ndarray:
    """Read an 8-bit grayscale or RGB PNG/PGM/PPM as a (C, H, W) map in [0, 1]."""
    from PIL import Image, UnidentifiedImageError

    path = Path(path)
    if path.suffix.lower() not in IMAGE_SUFFIXES:
        raise DataError(f"{path}: unsupported image format {path.suffix!r}")
    try:
        with Image.open(path) as img:
            img.load()
            if img.mode not in ("L", "RGB"):
                raise DataError(f"{path}: unsupported pixel mode {img.mode!r}, need 8-bit L or RGB")
            arr = np.asarray(img, dtype=np.uint8)
    except (UnidentifiedImageError, OSError, SyntaxError, ValueError) as exc:
        if isinstance(exc, DataError):
            raise
        raise DataError(f"{path}: cannot decode image ({exc})") from None
    if arr.ndim == 2:
        arr = arr[None]
    else:
        arr = arr.transpose(2, 0, 1)
    return np.ascontiguousarray(arr, dtype=np.float32) / np.float32(255.0)


def load_feature_map(path) -> np.ndarray:
    """Load an image or a rank-3 TensorFile."""
    if Path(path).suffix.lower() in IMAGE_SUFFIXES:
        return load_image(path)
    x = read_tensor(path)
    if x.ndim == 2:
        x = x[None]
    if x.ndim != 3:
        raise DataError(f"{path}: expected a rank-2 or rank-3 tensor, got rank {x.ndim}")
    return x
