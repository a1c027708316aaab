"""Deterministic synthetic RGB/IR pairs for desk-scale checks."""

from __future__ import annotations

import numpy as np

from .errors import ShapeError
from .wavelet import SubBands, idwt2_haar

KINDS = ("blur-complement", "checker-smooth", "noise")


def box_blur(x: np.ndarray, k: int = 5) -> np.ndarray:
    """k x k mean filter per channel with edge replication."""
    r = k // 2
    xp = np.pad(x, ((0, 0), (r, r), (r, r)), mode="edge")
    c = np.cumsum(np.cumsum(xp, axis=1, dtype=np.float64), axis=2)
    c = np.pad(c, ((0, 0), (1, 0), (1, 0)))
    h, w = x.shape[1:]
    s = c[:, k:k + h, k:k + w] - c[:, :h, k:k + w] - c[:, k:k + h, :w] + c[:, :h, :w]
    return (s / (k * k)).astype(x.dtype)


def _ramp(h: int, w: int) -> np.ndarray:
    yy, xx = np.mgrid[0:h, 0:w]
    return ((yy + xx) / max(h + w - 2, 1)).astype(np.float32)


def synth_pair(kind: str, size: tuple[int, int], seed: int,
               channels: tuple[int, int] = (3, 1)) -> tuple[np.ndarray, np.ndarray]:
    """Return (rgb, ir) maps of shape (channels[0], H, W) and (channels[1], H, W).

    blur-complement: sharp texture (smooth ramp plus uniformly distributed Haar
        detail coefficients), and a box-blurred copy of its luminance
    checker-smooth: pixel-pitch checkerboard, and a linear ramp
    noise: independent uniform maps
    """
    h, w = size
    if h < 1 or w < 1:
        raise ShapeError(f"synth size must be positive, got {h}x{w}")
    if kind not in KINDS:
        raise ValueError(f"unknown synth kind {kind!r}, expected one of {KINDS}")
    c_rgb, c_ir = channels
    rng = np.random.default_rng(seed)
    if kind == "blur-complement":
        hh, hw = (h + 1) // 2, (w + 1) // 2
        ll = np.repeat(2.0 * _ramp(hh, hw)[None], c_rgb, axis=0)
        details = rng.uniform(-0.25, 0.25, size=(3, c_rgb, hh, hw)).astype(np.float32)
        rgb = idwt2_haar(SubBands(ll, *details))[:, :h, :w]
        ir = box_blur(np.repeat(rgb.mean(axis=0, keepdims=True), c_ir, axis=0))
    elif kind == "checker-smooth":
        yy, xx = np.mgrid[0:h, 0:w]
        checker = ((yy + xx) % 2).astype(np.float32)
        rgb = np.repeat(checker[None], c_rgb, axis=0)
        ir = np.repeat(_ramp(h, w)[None], c_ir, axis=0)
    else:
        rgb = rng.uniform(0.0, 1.0, size=(c_rgb, h, w)).astype(np.float32)
        ir = rng.uniform(0.0, 1.0, size=(c_ir, h, w)).astype(np.float32)
    return np.ascontiguousarray(rgb, np.float32), np.ascontiguousarray(ir, np.float32)
