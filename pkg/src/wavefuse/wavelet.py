"""
Orthonormal 2D Haar DWT/IDWT on (channels, height, width) feature maps.

Every channel is transformed independently (depthwise). Sub-bands are kept as
four separate maps so fusion rules can address them by name.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .errors import DataError, ShapeError

_SCALE = np.float32(0.5)  # (1/sqrt2) * (1/sqrt2) for the separable 2x2 filters


def feature_map(data, dtype=np.float32) -> np.ndarray:
    """Build a validated (C, H, W) feature map, cast to 32-bit floats by default."""
    arr = np.ascontiguousarray(data, dtype=dtype)
    return check_feature_map(arr)


def check_feature_map(x: np.ndarray, name: str = "x") -> np.ndarray:
    if not isinstance(x, np.ndarray) or x.ndim != 3:
        raise ShapeError(f"{name}: expected a (channels, height, width) array, got shape {np.shape(x)}")
    if x.size == 0:
        raise ShapeError(f"{name}: zero-sized feature map {x.shape}")
    if not np.issubdtype(x.dtype, np.floating):
        raise DataError(f"{name}: expected floating point data, got {x.dtype}")
    if not np.all(np.isfinite(x)):
        raise DataError(f"{name}: contains non-finite values")
    return x


class Details(NamedTuple):
    """The three detail (high-frequency) sub-bands."""

    lh: np.ndarray
    hl: np.ndarray
    hh: np.ndarray

    @property
    def shape(self):
        return self.lh.shape


class SubBands(NamedTuple):
    ll: np.ndarray
    lh: np.ndarray
    hl: np.ndarray
    hh: np.ndarray

    @property
    def shape(self):
        return self.ll.shape

    @property
    def details(self) -> Details:
        return Details(self.lh, self.hl, self.hh)

    def energy(self) -> float:
        return float(sum(np.sum(np.square(b, dtype=np.float64)) for b in self))


def dwt2_haar(x: np.ndarray) -> SubBands:
    """Single-level orthonormal Haar analysis.

    For each 2x2 block [[a, b], [c, d]]:
    ll = (a+b+c+d)/2, lh = (a-b+c-d)/2, hl = (a+b-c-d)/2, hh = (a-b-c+d)/2.
    """
    check_feature_map(x)
    _, h, w = x.shape
    if h % 2 or w % 2:
        raise ShapeError(f"dwt2_haar needs even height and width, got {h}x{w}")
    a = x[:, 0::2, 0::2]
    b = x[:, 0::2, 1::2]
    c = x[:, 1::2, 0::2]
    d = x[:, 1::2, 1::2]
    s_ab, d_ab = a + b, a - b
    s_cd, d_cd = c + d, c - d
    scale = x.dtype.type(_SCALE)
    return SubBands(
        ll=(s_ab + s_cd) * scale,
        lh=(d_ab + d_cd) * scale,
        hl=(s_ab - s_cd) * scale,
        hh=(d_ab - d_cd) * scale,
    )


def idwt2_haar(s: SubBands) -> np.ndarray:
    """Inverse of `dwt2_haar`; output is C x 2h x 2w."""
    ll, lh, hl, hh = s
    for name, band in zip(SubBands._fields, s):
        check_feature_map(band, name)
        if band.shape != ll.shape:
            raise ShapeError(f"sub-band {name} has shape {band.shape}, expected {ll.shape}")
    c, h, w = ll.shape
    dtype = np.result_type(ll, lh, hl, hh)
    scale = dtype.type(_SCALE)
    p, q = ll + lh, ll - lh
    r, t = hl + hh, hl - hh
    out = np.empty((c, 2 * h, 2 * w), dtype=dtype)
    out[:, 0::2, 0::2] = (p + r) * scale
    out[:, 0::2, 1::2] = (q + t) * scale
    out[:, 1::2, 0::2] = (p - r) * scale
    out[:, 1::2, 1::2] = (q - t) * scale
    return out


def dwt2_multilevel(x: np.ndarray, levels: int) -> list[SubBands]:
    """Chain `dwt2_haar` on successive ll bands. Index 0 is the finest level."""
    check_feature_map(x)
    if levels < 1:
        raise ShapeError(f"levels must be positive, got {levels}")
    _, h, w = x.shape
    step = 1 << levels
    if h % step or w % step:
        raise ShapeError(f"{h}x{w} is not divisible by 2**{levels}")
    out = []
    cur = x
    for _ in range(levels):
        bands = dwt2_haar(cur)
        out.append(bands)
        cur = bands.ll
    return out


def idwt2_multilevel(levels: list[SubBands]) -> np.ndarray:
    """Reconstruct from `dwt2_multilevel` output; only the coarsest ll is read."""
    if not levels:
        raise ShapeError("no levels to reconstruct")
    cur = levels[-1].ll
    for bands in reversed(levels):
        cur = idwt2_haar(SubBands(cur, bands.lh, bands.hl, bands.hh))
    return cur


def upsample_zero_detail(x: np.ndarray) -> np.ndarray:
    """2x upsampling by IDWT with all detail bands set to zero."""
    z = np.zeros_like(x)
    return idwt2_haar(SubBands(x, z, z, z))
