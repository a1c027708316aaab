"""Wall-clock timings. Informational; numbers depend on the machine."""

from __future__ import annotations

import time

import numpy as np

from .pipeline import PipelineConfig, init_wave_weights, wave_forward
from .ssm import init_scan_params, ss2d
from .wavelet import dwt2_haar

DWT_SMOKE_SHAPE = (3, 640, 640)
DWT_SMOKE_MS = 50.0


def time_call(fn, iters: int, warmup: int = 1) -> dict:
    for _ in range(warmup):
        fn()
    samples = []
    for _ in range(iters):
        t0 = time.perf_counter()
        fn()
        samples.append((time.perf_counter() - t0) * 1e3)
    return {"iters": iters, "median_ms": float(np.median(samples)), "p95_ms": float(np.percentile(samples, 95))}


def run_bench(size: tuple[int, int] = (64, 64), iters: int = 10, seed: int = 0) -> list[dict]:
    h, w = size
    rng = np.random.default_rng(seed)
    records = []

    x = rng.standard_normal((3, h, w)).astype(np.float32)
    records.append({"op": "dwt2_haar", "shape": list(x.shape), **time_call(lambda: dwt2_haar(x), iters)})

    # ss2d at the first fusion level's scale: 16 expanded channels over an H/8 x W/8 map
    fx = rng.standard_normal((16, max(h // 8, 1), max(w // 8, 1))).astype(np.float32)
    params = [init_scan_params(rng, 16, 16) for _ in range(4)]
    records.append({"op": "ss2d", "shape": list(fx.shape), **time_call(lambda: ss2d(fx, params), iters)})

    cfg = PipelineConfig(height=h, width=w, seed=seed)
    weights = init_wave_weights(cfg)
    rgb = rng.uniform(size=(cfg.rgb_channels, h, w)).astype(np.float32)
    ir = rng.uniform(size=(cfg.ir_channels, h, w)).astype(np.float32)
    records.append({"op": "wave_forward", "shape": [h, w],
                    **time_call(lambda: wave_forward(rgb, ir, weights, cfg), iters)})

    big = rng.standard_normal(DWT_SMOKE_SHAPE).astype(np.float32)
    smoke = time_call(lambda: dwt2_haar(big), iters)
    records.append({"op": "dwt2_haar_smoke", "shape": list(DWT_SMOKE_SHAPE), **smoke,
                    "threshold_ms": DWT_SMOKE_MS, "ok": smoke["median_ms"] < DWT_SMOKE_MS})
    return records
