"""
Desk-scale forward path: a two-stream backbone stub, wavelet fusion at the
configured stages and an IDWT-based head producing multi-scale feature maps.

Resolution bookkeeping: stage k always emits features at H/2**k. A stage
normally halves with a stride-2 convolution; a stage that directly follows a
fusion point receives the half-resolution fused low band and keeps stride 1,
because the DWT already did its downsampling.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import parallel
from .errors import ConfigError, ShapeError
from .fusion import HFE_MODES, FusedLevel, WmfbWeights, init_wmfb_weights, swap_count, wmfb
from .nn import dense_init, dwconv3x3, linear, silu
from .wavelet import SubBands, check_feature_map, dwt2_haar, idwt2_haar, upsample_zero_detail


@dataclass(frozen=True)
class PipelineConfig:
    height: int = 64
    width: int = 64
    channels: tuple[int, ...] = (8, 16, 32, 32, 32)
    wmfb_stages: tuple[int, ...] = (2, 3, 5)
    seed: int = 0
    hfe_tie: str = "inclusive"
    ss2d_aggregation: str = "sum"
    low_mode: str = "lmfb"
    high_mode: str = "hfe"
    head_aggregate: str = "sum"
    head_upsample: str = "idwt"
    head_channels: int = 16
    expansion: int = 2
    d_state: int = 16
    swap_fraction: float = 0.5
    tied_dfm_paths: bool = True
    shared_scan: bool = False
    rgb_channels: int = 3
    ir_channels: int = 1


_CHOICES = {
    "hfe_tie": HFE_MODES,
    "ss2d_aggregation": ("sum", "mean"),
    "low_mode": ("lmfb", "avg"),
    "high_mode": ("hfe", "avg"),
    "head_aggregate": ("sum", "concat"),
    "head_upsample": ("idwt", "nearest"),
}


@dataclass(frozen=True)
class PipelinePlan:
    """Shapes implied by a config, computed without touching any data."""

    strides: tuple[int, ...]  # per executed stage
    stage_shapes: tuple[tuple[int, int, int], ...]  # (C, H, W) stage outputs
    level_shapes: tuple[tuple[int, int, int], ...]  # fused low band per fusion point
    pyramid_shapes: tuple[tuple[int, int, int], ...]


def plan_pipeline(cfg: PipelineConfig) -> PipelinePlan:
    """Validate `cfg` and derive every intermediate shape. Raises ConfigError."""
    for key, allowed in _CHOICES.items():
        if getattr(cfg, key) not in allowed:
            raise ConfigError(f"{key}: expected one of {allowed}, got {getattr(cfg, key)!r}")
    for key in ("height", "width", "head_channels", "expansion", "d_state", "rgb_channels", "ir_channels"):
        v = getattr(cfg, key)
        if not isinstance(v, int) or isinstance(v, bool) or v < 1:
            raise ConfigError(f"{key}: expected a positive integer, got {v!r}")
    if not cfg.channels or any(not isinstance(c, int) or c < 1 for c in cfg.channels):
        raise ConfigError(f"channels: expected positive integers, got {cfg.channels!r}")
    n = len(cfg.channels)
    stages = tuple(cfg.wmfb_stages)
    if not stages or list(stages) != sorted(set(stages)) or stages[0] < 1 or stages[-1] > n:
        raise ConfigError(f"wmfb_stages: expected increasing stage indices in 1..{n}, got {stages!r}")
    for k in stages:
        try:
            swap_count(cfg.channels[k - 1], cfg.swap_fraction)
        except ShapeError as exc:
            raise ConfigError(f"swap_fraction: {exc}") from None

    h, w = cfg.height, cfg.width
    strides, stage_shapes, level_shapes = [], [], []
    for k in range(1, stages[-1] + 1):
        stride = 1 if (k - 1) in stages else 2
        if stride == 2:
            if h % 2 or w % 2:
                raise ConfigError(f"height/width: stage {k} input {h}x{w} cannot be halved")
            h, w = h // 2, w // 2
        strides.append(stride)
        stage_shapes.append((cfg.channels[k - 1], h, w))
        if k in stages:
            if h % 2 or w % 2:
                raise ConfigError(f"height/width: DWT at stage {k} needs even size, got {h}x{w}")
            h, w = h // 2, w // 2
            level_shapes.append((cfg.channels[k - 1], h, w))
    pyramid = tuple((cfg.head_channels, 2 * lh, 2 * lw) for _, lh, lw in level_shapes)
    return PipelinePlan(tuple(strides), tuple(stage_shapes), tuple(level_shapes), pyramid)


@dataclass
class StageWeights:
    dw: np.ndarray  # (C_in, 3, 3)
    dw_bias: np.ndarray
    pw: np.ndarray  # (C_out, C_in)
    pw_bias: np.ndarray
    stride: int = 2


@dataclass
class BackboneStub:
    rgb: list[StageWeights]
    ir: list[StageWeights]


@dataclass
class HeadWeights:
    proj: list[np.ndarray]  # per level, finest first
    proj_bias: list[np.ndarray]
    agg_proj: list[np.ndarray] | None = None  # (C, 2C) per level for concat aggregation


@dataclass
class WaveWeights:
    backbone: BackboneStub
    wmfb: list[WmfbWeights]
    head: HeadWeights


def _init_stream(rng, in_ch: int, cfg: PipelineConfig, strides) -> list[StageWeights]:
    out = []
    for k, stride in enumerate(strides):
        c_out = cfg.channels[k]
        out.append(StageWeights(
            dw=(rng.standard_normal((in_ch, 3, 3)) / 3.0).astype(np.float32),
            dw_bias=np.zeros(in_ch, np.float32),
            pw=dense_init(rng, c_out, in_ch, gain=1.5),
            pw_bias=np.zeros(c_out, np.float32),
            stride=stride,
        ))
        in_ch = c_out
    return out


def init_wave_weights(cfg: PipelineConfig) -> WaveWeights:
    """Deterministic pseudo-random weights seeded by `cfg.seed`."""
    plan = plan_pipeline(cfg)
    rng = np.random.default_rng(cfg.seed)
    backbone = BackboneStub(
        rgb=_init_stream(rng, cfg.rgb_channels, cfg, plan.strides),
        ir=_init_stream(rng, cfg.ir_channels, cfg, plan.strides),
    )
    blocks = [
        init_wmfb_weights(rng, cfg.channels[k - 1], cfg.expansion, cfg.d_state,
                          swap_fraction=cfg.swap_fraction, hfe_mode=cfg.hfe_tie,
                          tied_paths=cfg.tied_dfm_paths, shared_scan=cfg.shared_scan,
                          aggregation=cfg.ss2d_aggregation)
        for k in cfg.wmfb_stages
    ]
    level_ch = [c for c, _, _ in plan.level_shapes]
    proj, bias = [], []
    for i, c in enumerate(level_ch):
        fan_in = c if i == len(level_ch) - 1 else c + cfg.head_channels
        proj.append(dense_init(rng, cfg.head_channels, fan_in))
        bias.append(np.zeros(cfg.head_channels, np.float32))
    agg = [dense_init(rng, c, 2 * c) for c in level_ch] if cfg.head_aggregate == "concat" else None
    return WaveWeights(backbone, blocks, HeadWeights(proj, bias, agg))


def stage_forward(x: np.ndarray, sw: StageWeights) -> np.ndarray:
    return silu(linear(dwconv3x3(x, sw.dw, sw.dw_bias, stride=sw.stride), sw.pw, sw.pw_bias))


def _check_inputs(img_rgb, img_ir, stub: BackboneStub) -> None:
    check_feature_map(img_rgb, "img_rgb")
    check_feature_map(img_ir, "img_ir")
    if img_rgb.shape[1:] != img_ir.shape[1:]:
        raise ShapeError(f"RGB {img_rgb.shape[1:]} and IR {img_ir.shape[1:]} spatial sizes differ")
    for name, img, stream in (("img_rgb", img_rgb, stub.rgb), ("img_ir", img_ir, stub.ir)):
        if img.shape[0] != stream[0].dw.shape[0]:
            raise ShapeError(f"{name} has {img.shape[0]} channels, backbone expects {stream[0].dw.shape[0]}")


def backbone_forward(img_rgb: np.ndarray, img_ir: np.ndarray, stub: BackboneStub,
                     upto: int = 2) -> list[tuple[np.ndarray, np.ndarray]]:
    """Run stages 1..upto of both streams independently; returns per-stage pairs."""
    _check_inputs(img_rgb, img_ir, stub)
    if not 1 <= upto <= len(stub.rgb):
        raise ShapeError(f"upto must lie in 1..{len(stub.rgb)}, got {upto}")
    out = []
    r, i = img_rgb, img_ir
    for k in range(upto):
        for name, x, sw in (("rgb", r, stub.rgb[k]), ("ir", i, stub.ir[k])):
            if sw.stride == 2 and (x.shape[1] % 2 or x.shape[2] % 2):
                raise ShapeError(f"stage {k + 1} ({name}): cannot halve {x.shape[1]}x{x.shape[2]}")
        r, i = parallel.ordered_map(lambda j: stage_forward(*j), [(r, stub.rgb[k]), (i, stub.ir[k])])
        out.append((r, i))
    return out


class PyramidOutput(NamedTuple):
    maps: list[np.ndarray]  # finest first
    reconstructed: list[np.ndarray]  # per-level IDWT output before the neck
    levels: list[FusedLevel]


def nearest_upsample(x: np.ndarray) -> np.ndarray:
    """2x nearest-neighbour upsampling, scaled by 1/2.

    The scaling makes it coincide with zero-detail IDWT, so comparing the two
    isolates exactly what the detail bands contribute.
    """
    return np.repeat(np.repeat(x, 2, axis=1), 2, axis=2) * x.dtype.type(0.5)


def _upsample_to(x: np.ndarray, shape: tuple[int, int], up) -> np.ndarray:
    while x.shape[1:] != shape:
        if x.shape[1] >= shape[0] or shape[0] % x.shape[1] or shape[1] % x.shape[2]:
            raise ShapeError(f"cannot upsample {x.shape[1:]} to {shape} by powers of two")
        x = up(x)
    return x


def head_forward(levels: list[FusedLevel], head: HeadWeights, aggregate: str = "sum",
                 upsample: str = "idwt") -> PyramidOutput:
    """Merge the two low bands per level, invert the DWT with the fused details,
    then run a top-down pass (coarse map upsampled, concatenated, 1x1-projected).

    upsample="nearest" is the ablation: detail bands are discarded and both the
    level reconstruction and the top-down path use `nearest_upsample`.
    """
    if not levels:
        raise ShapeError("head_forward needs at least one fused level")
    if upsample not in ("idwt", "nearest"):
        raise ValueError(f"unknown upsample mode {upsample!r}")
    for a, b in zip(levels, levels[1:]):
        ha, wa = a.low_rgb.shape[1:]
        hb, wb = b.low_rgb.shape[1:]
        ok = hb < ha and ha % hb == 0 and wa % wb == 0 and ha // hb == wa // wb and (ha // hb) & (ha // hb - 1) == 0
        if not ok:
            raise ShapeError(f"level shapes {a.low_rgb.shape} -> {b.low_rgb.shape} do not form a power-of-two chain")

    recon = []
    for j, lvl in enumerate(levels):
        if aggregate == "sum":
            low = lvl.low_rgb + lvl.low_ir
        elif aggregate == "concat":
            low = linear(np.concatenate([lvl.low_rgb, lvl.low_ir]), head.agg_proj[j])
        else:
            raise ValueError(f"unknown aggregate mode {aggregate!r}")
        if upsample == "idwt":
            recon.append(idwt2_haar(SubBands(low, *lvl.high)))
        else:
            recon.append(nearest_upsample(low))

    up = upsample_zero_detail if upsample == "idwt" else nearest_upsample
    maps = [None] * len(levels)
    maps[-1] = linear(recon[-1], head.proj[-1], head.proj_bias[-1])
    for j in range(len(levels) - 2, -1, -1):
        coarse = _upsample_to(maps[j + 1], recon[j].shape[1:], up)
        maps[j] = linear(np.concatenate([recon[j], coarse]), head.proj[j], head.proj_bias[j])
    return PyramidOutput(maps, recon, list(levels))


def wave_forward(img_rgb: np.ndarray, img_ir: np.ndarray, weights: WaveWeights,
                 cfg: PipelineConfig) -> PyramidOutput:
    plan = plan_pipeline(cfg)
    _check_inputs(img_rgb, img_ir, weights.backbone)
    expected = (cfg.height, cfg.width)
    if img_rgb.shape[1:] != expected:
        raise ShapeError(f"input is {img_rgb.shape[1:]}, config expects {expected}")
    if len(weights.wmfb) != len(cfg.wmfb_stages):
        raise ShapeError(f"{len(weights.wmfb)} fusion blocks for {len(cfg.wmfb_stages)} fusion stages")

    levels = []
    r, i = img_rgb, img_ir
    for k in range(1, len(plan.strides) + 1):
        r, i = parallel.ordered_map(
            lambda j: stage_forward(*j),
            [(r, weights.backbone.rgb[k - 1]), (i, weights.backbone.ir[k - 1])],
        )
        if k in cfg.wmfb_stages:
            br, bi = dwt2_haar(r), dwt2_haar(i)
            lvl = wmfb(br.ll, bi.ll, br.details, bi.details, weights.wmfb[len(levels)],
                       low_mode=cfg.low_mode, high_mode=cfg.high_mode)
            levels.append(lvl)
            r, i = lvl.low_rgb, lvl.low_ir
    return head_forward(levels, weights.head, cfg.head_aggregate, cfg.head_upsample)
