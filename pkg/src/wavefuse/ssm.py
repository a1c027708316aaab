"""
Selective scan (S6), its four-direction 2D extension (SS2D) and the VSS block.

Parameterization per channel c with state size N:
    A_c      = -exp(a_log[c])                     (N,)   strictly negative
    delta_t  = softplus(W_delta x_t + b_delta)_c
    Abar     = exp(delta_t * A_c)
    Bbar     = delta_t * B_t,       B_t = W_b x_t   (N,)
    h_t      = Abar * h_{t-1} + Bbar * x_{t,c}
    y_{t,c}  = <C_t, h_t> + d_skip[c] * x_{t,c},    C_t = W_c x_t
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import parallel
from .errors import DataError, ShapeError
from .nn import dense_init, dwconv3x3, layer_norm, linear, silu, softplus
from .wavelet import check_feature_map

DIRECTIONS = ("row_fwd", "row_rev", "col_fwd", "col_rev")


@dataclass
class ScanParams:
    a_log: np.ndarray  # (d_model, d_state)
    d_skip: np.ndarray  # (d_model,)
    proj_b: np.ndarray  # (d_state, d_model)
    proj_c: np.ndarray  # (d_state, d_model)
    proj_delta: np.ndarray  # (d_model, d_model)
    delta_bias: np.ndarray  # (d_model,)

    @property
    def d_model(self) -> int:
        return self.a_log.shape[0]

    @property
    def d_state(self) -> int:
        return self.a_log.shape[1]

    def validate(self) -> None:
        d, n = self.a_log.shape
        expected = {
            "d_skip": (d,),
            "proj_b": (n, d),
            "proj_c": (n, d),
            "proj_delta": (d, d),
            "delta_bias": (d,),
        }
        for name, shape in expected.items():
            arr = getattr(self, name)
            if arr.shape != shape:
                raise ShapeError(f"ScanParams.{name} has shape {arr.shape}, expected {shape}")
        for name in ("a_log", *expected):
            if not np.all(np.isfinite(getattr(self, name))):
                raise DataError(f"ScanParams.{name} contains non-finite values")


def init_scan_params(rng: np.random.Generator, d_model: int, d_state: int = 16) -> ScanParams:
    # A in [-1, -1e-3], log-uniform
    a = np.exp(rng.uniform(np.log(1e-3), 0.0, size=(d_model, d_state)))
    return ScanParams(
        a_log=np.log(a).astype(np.float32),
        d_skip=np.ones(d_model, dtype=np.float32),
        proj_b=dense_init(rng, d_state, d_model),
        proj_c=dense_init(rng, d_state, d_model),
        proj_delta=dense_init(rng, d_model, d_model, gain=0.5),
        delta_bias=np.full(d_model, -1.0, dtype=np.float32),
    )


def selective_scan(seq: np.ndarray, p: ScanParams) -> np.ndarray:
    """Run the S6 recurrence over a (T, d_model) sequence.

    The recurrence is accumulated in float64; the result has the input dtype.
    """
    seq = np.asarray(seq)
    if seq.ndim != 2 or seq.shape[0] == 0:
        raise ShapeError(f"expected a non-empty (T, d_model) sequence, got shape {seq.shape}")
    p.validate()
    if seq.shape[1] != p.d_model:
        raise ShapeError(f"sequence has {seq.shape[1]} channels, params expect {p.d_model}")
    x = seq.astype(np.float64)
    a = -np.exp(p.a_log.astype(np.float64))
    delta = softplus(x @ p.proj_delta.T.astype(np.float64) + p.delta_bias)
    b = x @ p.proj_b.T.astype(np.float64)
    c = x @ p.proj_c.T.astype(np.float64)
    decay = np.exp(delta[:, :, None] * a[None])  # (T, D, N)
    drive = (delta * x)[:, :, None] * b[:, None, :]  # (T, D, N)
    y = np.empty_like(x)
    h = np.zeros(a.shape)
    for t in range(x.shape[0]):
        h = decay[t] * h + drive[t]
        y[t] = h @ c[t]
    y += p.d_skip * x
    return y.astype(seq.dtype, copy=False)


def _flatten(x: np.ndarray, direction: str) -> np.ndarray:
    c = x.shape[0]
    if direction.startswith("row"):
        seq = x.reshape(c, -1).T
    else:
        seq = x.transpose(0, 2, 1).reshape(c, -1).T
    return seq[::-1] if direction.endswith("rev") else seq


def _unflatten(seq: np.ndarray, direction: str, h: int, w: int) -> np.ndarray:
    if direction.endswith("rev"):
        seq = seq[::-1]
    c = seq.shape[1]
    if direction.startswith("row"):
        return seq.T.reshape(c, h, w)
    return seq.T.reshape(c, w, h).transpose(0, 2, 1)


def ss2d(x: np.ndarray, params: ScanParams | Sequence[ScanParams], aggregation: str = "sum") -> np.ndarray:
    """Four-direction selective scan of a (C, H, W) map.

    `params` is either one ScanParams shared by all directions or four, ordered
    as `DIRECTIONS`. Directional outputs are reduced in that fixed order.
    """
    check_feature_map(x)
    if isinstance(params, ScanParams):
        params = [params] * 4
    if len(params) != 4:
        raise ShapeError(f"ss2d needs 4 direction parameter sets, got {len(params)}")
    if aggregation not in ("sum", "mean"):
        raise ValueError(f"unknown ss2d aggregation {aggregation!r}")
    _, h, w = x.shape

    def run(i):
        d = DIRECTIONS[i]
        return _unflatten(selective_scan(_flatten(x, d), params[i]), d, h, w)

    maps = parallel.ordered_map(run, range(4))
    out = maps[0] + maps[1] + maps[2] + maps[3]
    if aggregation == "mean":
        out = out * out.dtype.type(0.25)
    return out


@dataclass
class VssWeights:
    norm_in_scale: np.ndarray  # (C,)
    norm_in_offset: np.ndarray
    embed_in: np.ndarray  # (eC, C)
    embed_in_bias: np.ndarray
    dwconv: np.ndarray  # (eC, 3, 3)
    dwconv_bias: np.ndarray
    scan: list[ScanParams]  # 4 directions, or 1 when shared
    norm_out_scale: np.ndarray  # (eC,)
    norm_out_offset: np.ndarray
    gate_proj: np.ndarray  # (eC, C)
    gate_bias: np.ndarray
    embed_out: np.ndarray  # (C, eC)
    embed_out_bias: np.ndarray
    aggregation: str = "sum"

    @property
    def d_model(self) -> int:
        return self.embed_in.shape[1]


def init_vss_weights(rng: np.random.Generator, channels: int, expansion: int = 2, d_state: int = 16,
                     shared_scan: bool = False, aggregation: str = "sum") -> VssWeights:
    inner = expansion * channels
    n_scan = 1 if shared_scan else 4
    f32 = np.float32
    return VssWeights(
        norm_in_scale=np.ones(channels, f32),
        norm_in_offset=np.zeros(channels, f32),
        embed_in=dense_init(rng, inner, channels),
        embed_in_bias=np.zeros(inner, f32),
        dwconv=(rng.standard_normal((inner, 3, 3)) / 3.0).astype(f32),
        dwconv_bias=np.zeros(inner, f32),
        scan=[init_scan_params(rng, inner, d_state) for _ in range(n_scan)],
        norm_out_scale=np.ones(inner, f32),
        norm_out_offset=np.zeros(inner, f32),
        gate_proj=dense_init(rng, inner, channels),
        gate_bias=np.zeros(inner, f32),
        embed_out=dense_init(rng, channels, inner, gain=0.5),
        embed_out_bias=np.zeros(channels, f32),
        aggregation=aggregation,
    )


def _scan_arg(scan: list[ScanParams]):
    return scan[0] if len(scan) == 1 else scan


def vss_block(x: np.ndarray, w: VssWeights) -> np.ndarray:
    check_feature_map(x)
    if x.shape[0] != w.d_model:
        raise ShapeError(f"vss_block: input has {x.shape[0]} channels, weights expect {w.d_model}")
    u = layer_norm(x, w.norm_in_scale, w.norm_in_offset)
    v = silu(dwconv3x3(linear(u, w.embed_in, w.embed_in_bias), w.dwconv, w.dwconv_bias))
    v = ss2d(v, _scan_arg(w.scan), w.aggregation)
    v = layer_norm(v, w.norm_out_scale, w.norm_out_offset)
    g = silu(linear(u, w.gate_proj, w.gate_bias))
    return x + linear(v * g, w.embed_out, w.embed_out_bias)
