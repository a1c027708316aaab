"""Small numpy building blocks shared by the ssm, fusion and pipeline modules.

All ops follow the dtype of their inputs (float32 in normal use, float64 when
a test wants finite differences).
"""

from __future__ import annotations

import dataclasses

import numpy as np

LN_EPS = 1e-6


def sigmoid(x):
    # tanh form never overflows
    return 0.5 * (1.0 + np.tanh(0.5 * x))


def silu(x):
    return x * sigmoid(x)


def softplus(x):
    # log1p(exp(x)) without overflow for large x
    return np.logaddexp(0.0, x).astype(np.result_type(x), copy=False)


def linear(x: np.ndarray, weight: np.ndarray, bias: np.ndarray | None = None) -> np.ndarray:
    """Channel mixing of a (C, H, W) map: weight is (C_out, C_in)."""
    out = np.tensordot(weight, x, axes=([1], [0]))
    if bias is not None:
        out = out + bias[:, None, None]
    return out


def layer_norm(x: np.ndarray, scale: np.ndarray, offset: np.ndarray) -> np.ndarray:
    """Normalize over channels independently at every spatial position."""
    mu = x.mean(axis=0, keepdims=True)
    var = np.square(x - mu).mean(axis=0, keepdims=True)
    return (x - mu) / np.sqrt(var + LN_EPS) * scale[:, None, None] + offset[:, None, None]


def dwconv3x3(x: np.ndarray, kernel: np.ndarray, bias: np.ndarray | None = None, stride: int = 1) -> np.ndarray:
    """Depthwise 3x3 convolution (cross-correlation), zero padding 1."""
    c, h, w = x.shape
    if kernel.shape != (c, 3, 3):
        raise ValueError(f"kernel shape {kernel.shape} does not match {c} channels")
    xp = np.pad(x, ((0, 0), (1, 1), (1, 1)))
    ho = (h - 1) // stride + 1
    wo = (w - 1) // stride + 1
    out = np.zeros((c, ho, wo), dtype=np.result_type(x, kernel))
    for i in range(3):
        for j in range(3):
            patch = xp[:, i:i + stride * (ho - 1) + 1:stride, j:j + stride * (wo - 1) + 1:stride]
            out += kernel[:, i, j][:, None, None] * patch
    if bias is not None:
        out += bias[:, None, None]
    return out


def map_arrays(fn, obj):
    """Apply `fn` to every ndarray inside nested dataclasses / lists / tuples."""
    if isinstance(obj, np.ndarray):
        return fn(obj)
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        changes = {f.name: map_arrays(fn, getattr(obj, f.name)) for f in dataclasses.fields(obj)}
        return dataclasses.replace(obj, **changes)
    if isinstance(obj, list):
        return [map_arrays(fn, v) for v in obj]
    if isinstance(obj, tuple):
        return tuple(map_arrays(fn, v) for v in obj)
    return obj


def zeros_like_weights(obj):
    return map_arrays(np.zeros_like, obj)


def cast_weights(obj, dtype):
    return map_arrays(lambda a: a.astype(dtype), obj)


def dense_init(rng: np.random.Generator, fan_out: int, fan_in: int, gain: float = 1.0) -> np.ndarray:
    return (rng.standard_normal((fan_out, fan_in)) * gain / np.sqrt(fan_in)).astype(np.float32)
