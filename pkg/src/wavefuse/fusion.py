"""
WaveMamba Fusion Block: low-frequency Mamba fusion (SFM then DFM) plus the
absolute-max high-frequency enhancement rule.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import parallel
from .errors import ShapeError
from .nn import dense_init, dwconv3x3, layer_norm, linear, silu
from .ssm import ScanParams, VssWeights, init_scan_params, init_vss_weights, ss2d, vss_block
from .wavelet import Details, check_feature_map

HFE_MODES = ("inclusive", "strict")


def _same_shape(a: np.ndarray, b: np.ndarray, what: str) -> None:
    check_feature_map(a, f"{what}[0]")
    check_feature_map(b, f"{what}[1]")
    if a.shape != b.shape:
        raise ShapeError(f"{what}: shape mismatch {a.shape} vs {b.shape}")


def swap_count(channels: int, fraction: float) -> int:
    if not 0.0 < fraction < 1.0:
        raise ShapeError(f"swap fraction must lie in (0, 1), got {fraction}")
    k = fraction * channels
    if abs(k - round(k)) > 1e-9:
        raise ShapeError(f"swap fraction {fraction} of {channels} channels is not an integer")
    return int(round(k))


def channel_swap(a: np.ndarray, b: np.ndarray, fraction: float = 0.5) -> tuple[np.ndarray, np.ndarray]:
    """Exchange the leading `fraction` of channels between two maps."""
    _same_shape(a, b, "channel_swap")
    k = swap_count(a.shape[0], fraction)
    return (np.concatenate([b[:k], a[k:]], axis=0),
            np.concatenate([a[:k], b[k:]], axis=0))


@dataclass
class PathWeights:
    """embed -> dwconv3x3 -> SiLU -> SS2D -> layer norm."""

    embed: np.ndarray  # (eC, C)
    embed_bias: np.ndarray
    dwconv: np.ndarray  # (eC, 3, 3)
    dwconv_bias: np.ndarray
    scan: list[ScanParams]
    norm_scale: np.ndarray
    norm_offset: np.ndarray


@dataclass
class DfmWeights:
    """Weights for one role assignment (one modality primary).

    `aux` is None when the auxiliary stream reuses the primary's first path.
    `proj_out` is bias-free on purpose: a closed gate yields exactly zero.
    """

    main: PathWeights
    gate: np.ndarray  # (eC, C)
    gate_bias: np.ndarray
    proj_out: np.ndarray  # (C, eC)
    aux: PathWeights | None = None
    aggregation: str = "sum"

    @property
    def aux_path(self) -> PathWeights:
        return self.main if self.aux is None else self.aux


@dataclass
class WmfbWeights:
    sfm_vss_rgb: VssWeights
    sfm_vss_ir: VssWeights
    dfm_rgb_primary: DfmWeights
    dfm_ir_primary: DfmWeights
    swap_fraction: float = 0.5
    hfe_mode: str = "inclusive"

    @property
    def channels(self) -> int:
        return self.sfm_vss_rgb.d_model


class FusedLevel(NamedTuple):
    low_rgb: np.ndarray
    low_ir: np.ndarray
    high: Details


def _init_path(rng, channels, inner, d_state, shared_scan) -> PathWeights:
    return PathWeights(
        embed=dense_init(rng, inner, channels),
        embed_bias=np.zeros(inner, np.float32),
        dwconv=(rng.standard_normal((inner, 3, 3)) / 3.0).astype(np.float32),
        dwconv_bias=np.zeros(inner, np.float32),
        scan=[init_scan_params(rng, inner, d_state) for _ in range(1 if shared_scan else 4)],
        norm_scale=np.ones(inner, np.float32),
        norm_offset=np.zeros(inner, np.float32),
    )


def init_dfm_weights(rng: np.random.Generator, channels: int, expansion: int = 2, d_state: int = 16,
                     tied_paths: bool = True, shared_scan: bool = False, aggregation: str = "sum") -> DfmWeights:
    inner = expansion * channels
    main = _init_path(rng, channels, inner, d_state, shared_scan)
    aux = None if tied_paths else _init_path(rng, channels, inner, d_state, shared_scan)
    return DfmWeights(
        main=main,
        gate=dense_init(rng, inner, channels),
        gate_bias=np.zeros(inner, np.float32),
        proj_out=dense_init(rng, channels, inner, gain=0.5),
        aux=aux,
        aggregation=aggregation,
    )


def init_wmfb_weights(rng: np.random.Generator, channels: int, expansion: int = 2, d_state: int = 16, *,
                      swap_fraction: float = 0.5, hfe_mode: str = "inclusive", tied_paths: bool = True,
                      shared_scan: bool = False, aggregation: str = "sum") -> WmfbWeights:
    swap_count(channels, swap_fraction)
    if hfe_mode not in HFE_MODES:
        raise ValueError(f"unknown hfe mode {hfe_mode!r}")
    vss = dict(expansion=expansion, d_state=d_state, shared_scan=shared_scan, aggregation=aggregation)
    dfm = dict(vss, tied_paths=tied_paths)
    return WmfbWeights(
        sfm_vss_rgb=init_vss_weights(rng, channels, **vss),
        sfm_vss_ir=init_vss_weights(rng, channels, **vss),
        dfm_rgb_primary=init_dfm_weights(rng, channels, **dfm),
        dfm_ir_primary=init_dfm_weights(rng, channels, **dfm),
        swap_fraction=swap_fraction,
        hfe_mode=hfe_mode,
    )


def sfm(low_rgb: np.ndarray, low_ir: np.ndarray, w: WmfbWeights) -> tuple[np.ndarray, np.ndarray]:
    t_rgb, t_ir = channel_swap(low_rgb, low_ir, w.swap_fraction)
    return vss_block(t_rgb, w.sfm_vss_rgb), vss_block(t_ir, w.sfm_vss_ir)


def run_path(x: np.ndarray, p: PathWeights, aggregation: str = "sum") -> np.ndarray:
    z = silu(dwconv3x3(linear(x, p.embed, p.embed_bias), p.dwconv, p.dwconv_bias))
    z = ss2d(z, p.scan[0] if len(p.scan) == 1 else p.scan, aggregation)
    return layer_norm(z, p.norm_scale, p.norm_offset)


def dfm_directional(primary: np.ndarray, auxiliary: np.ndarray, w: DfmWeights) -> np.ndarray:
    """The primary's gate stream regulates both its own scan stream and the auxiliary's."""
    _same_shape(primary, auxiliary, "dfm_directional")
    if primary.shape[0] != w.proj_out.shape[0]:
        raise ShapeError(f"dfm: input has {primary.shape[0]} channels, weights expect {w.proj_out.shape[0]}")
    z_p = run_path(primary, w.main, w.aggregation)
    z_a = run_path(auxiliary, w.aux_path, w.aggregation)
    g = silu(linear(primary, w.gate, w.gate_bias))
    return linear(g * z_p + g * z_a, w.proj_out)


def dfm(f_rgb: np.ndarray, f_ir: np.ndarray, w: WmfbWeights) -> tuple[np.ndarray, np.ndarray]:
    jobs = [(f_rgb, f_ir, w.dfm_rgb_primary), (f_ir, f_rgb, w.dfm_ir_primary)]
    out = parallel.ordered_map(lambda j: dfm_directional(*j), jobs)
    return out[0], out[1]


def hfe_band(rgb: np.ndarray, ir: np.ndarray, mode: str = "inclusive") -> np.ndarray:
    """Pick the coefficient with the larger magnitude, elementwise.

    inclusive: ties keep the RGB value. strict: both masks test "> 0", so ties
    produce 0.
    """
    if rgb.shape != ir.shape:
        raise ShapeError(f"hfe: shape mismatch {rgb.shape} vs {ir.shape}")
    ar, ai = np.abs(rgb), np.abs(ir)
    if mode == "inclusive":
        return np.where(ar >= ai, rgb, ir)
    if mode == "strict":
        zero = np.zeros((), dtype=np.result_type(rgb, ir))
        return np.where(ar > ai, rgb, zero) + np.where(ai > ar, ir, zero)
    raise ValueError(f"unknown hfe mode {mode!r}")


def hfe(h_rgb: Details, h_ir: Details, mode: str = "inclusive") -> Details:
    for name, a, b in zip(Details._fields, h_rgb, h_ir):
        check_feature_map(a, f"rgb.{name}")
        check_feature_map(b, f"ir.{name}")
    return Details(*(hfe_band(a, b, mode) for a, b in zip(h_rgb, h_ir)))


def average_details(h_rgb: Details, h_ir: Details) -> Details:
    return Details(*(0.5 * (a + b) for a, b in zip(h_rgb, h_ir)))


def wmfb(low_rgb: np.ndarray, low_ir: np.ndarray, high_rgb: Details, high_ir: Details, w: WmfbWeights,
         low_mode: str = "lmfb", high_mode: str = "hfe") -> FusedLevel:
    """Fuse one wavelet level. The avg modes give the ablation variants.

    `w` may be None when low_mode is "avg"; HFE then uses the inclusive tie rule.
    """
    _same_shape(low_rgb, low_ir, "wmfb low")
    for band in (*high_rgb, *high_ir):
        if band.shape != low_rgb.shape:
            raise ShapeError(f"wmfb: detail band shape {band.shape} != low shape {low_rgb.shape}")
    if low_mode == "lmfb":
        s_rgb, s_ir = sfm(low_rgb, low_ir, w)
        out_rgb, out_ir = dfm(s_rgb, s_ir, w)
    elif low_mode == "avg":
        out_rgb = out_ir = 0.5 * (low_rgb + low_ir)
    else:
        raise ValueError(f"unknown low fusion mode {low_mode!r}")
    if high_mode == "hfe":
        high = hfe(high_rgb, high_ir, w.hfe_mode if w is not None else "inclusive")
    elif high_mode == "avg":
        high = average_details(high_rgb, high_ir)
    else:
        raise ValueError(f"unknown high fusion mode {high_mode!r}")
    return FusedLevel(out_rgb, out_ir, high)
