"""Exit criteria. Each test records one PASS/FAIL line (shown in the terminal summary)."""

import json
import time
import warnings

import numpy as np
import pytest

from oracles import absmax_pick, naive_scan, naive_ss2d, predicted_shapes
from wavefuse import pipeline
from wavefuse.analysis import entropy_report, per_pair_metrics
from wavefuse.cli import main
from wavefuse.errors import ConfigError
from wavefuse.fusion import FusedLevel, hfe_band
from wavefuse.pipeline import HeadWeights, PipelineConfig, head_forward, init_wave_weights, wave_forward
from wavefuse.ssm import ScanParams, selective_scan, ss2d
from wavefuse.synth import box_blur, synth_pair
from wavefuse.wavelet import Details, dwt2_haar, idwt2_haar


@pytest.fixture(scope="module")
def corpus():
    rng = np.random.default_rng(2024)
    maps = []
    for _ in range(1000):
        c = int(rng.integers(1, 9))
        n = 2 * int(rng.integers(2, 33))  # H = W in {4, ..., 64}
        maps.append(rng.standard_normal((c, n, n)).astype(np.float32))
    return maps


def test_perfect_reconstruction(corpus, report):
    t0 = time.perf_counter()
    worst = max(float(np.max(np.abs(idwt2_haar(dwt2_haar(x)) - x))) for x in corpus)
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-5 and elapsed < 5.0
    report("perfect reconstruction", ok, f"1000 maps, max err {worst:.2e} <= 1e-5, {elapsed:.2f}s < 5s")
    assert ok


def test_energy_conservation(corpus, report):
    worst = 0.0
    for x in corpus:
        e = float(np.sum(np.square(x, dtype=np.float64)))
        worst = max(worst, abs(dwt2_haar(x).energy() - e) / e)
    ok = worst <= 1e-5
    report("energy conservation", ok, f"max rel err {worst:.2e} <= 1e-5")
    assert ok


def _random_params(rng, d, n):
    return ScanParams(
        a_log=rng.uniform(-3, 1, (d, n)).astype(np.float32),
        d_skip=rng.standard_normal(d).astype(np.float32),
        proj_b=(0.5 * rng.standard_normal((n, d))).astype(np.float32),
        proj_c=(0.5 * rng.standard_normal((n, d))).astype(np.float32),
        proj_delta=(0.5 * rng.standard_normal((d, d))).astype(np.float32),
        delta_bias=rng.standard_normal(d).astype(np.float32),
    )


def test_scan_oracle_equivalence(report):
    rng = np.random.default_rng(7)
    worst = 0.0
    for _ in range(500):
        t, d, n = int(rng.integers(1, 65)), int(rng.integers(1, 9)), int(rng.integers(1, 5))
        p = _random_params(rng, d, n)
        seq = rng.standard_normal((t, d)).astype(np.float32)
        worst = max(worst, float(np.max(np.abs(selective_scan(seq, p) - naive_scan(seq, p)))))
    worst2d = 0.0
    for hw in [(2, 2), (3, 3)]:
        for _ in range(20):
            d, n = int(rng.integers(1, 5)), int(rng.integers(1, 5))
            params = [_random_params(rng, d, n) for _ in range(4)]
            x = rng.standard_normal((d, *hw)).astype(np.float32)
            worst2d = max(worst2d, float(np.max(np.abs(ss2d(x, params) - naive_ss2d(x, params)))))
    ok = worst <= 1e-5 and worst2d <= 1e-5
    report("scan oracle equivalence", ok, f"scan max err {worst:.2e}, ss2d 2x2/3x3 max err {worst2d:.2e}")
    assert ok


def test_hfe_exactness(report):
    rng = np.random.default_rng(11)
    n = 1_000_000
    rgb = rng.standard_normal(n).astype(np.float32)
    ir = rng.standard_normal(n).astype(np.float32)
    # force ~10% exact magnitude ties, half with opposite signs
    tie = rng.random(n) < 0.1
    ir[tie] = rgb[tie] * rng.choice(np.array([-1.0, 1.0], np.float32), int(tie.sum()))
    rgb3, ir3 = rgb.reshape(1, 1000, 1000), ir.reshape(1, 1000, 1000)
    inclusive = hfe_band(rgb3, ir3, "inclusive").ravel()
    strict = hfe_band(rgb3, ir3, "strict").ravel()
    is_tie = np.abs(rgb) == np.abs(ir)
    bad_nontie = bad_tie = 0
    for k, (a, b) in enumerate(zip(rgb.tolist(), ir.tolist())):
        want = absmax_pick(a, b)
        if is_tie[k]:
            bad_tie += (inclusive[k] != a) + (strict[k] != 0.0)
        else:
            bad_nontie += (inclusive[k] != want) + (strict[k] != want)
    ok = bad_nontie == 0 and bad_tie == 0
    report("HFE exactness", ok, f"{n} pairs, {int(is_tie.sum())} ties, mismatches non-tie={bad_nontie} tie={bad_tie}")
    assert ok


def _random_valid_config(rng):
    while True:
        stages = tuple(sorted(rng.choice(np.arange(1, 6), size=3, replace=False).tolist()))
        need = 2 ** (stages[-1] + 1)
        h = need * int(rng.integers(1, 4))
        w = need * int(rng.integers(1, 4))
        if h * w <= 128 * 128:
            break
    return PipelineConfig(
        height=h, width=w,
        channels=tuple(int(c) for c in rng.choice([2, 4, 6], size=5)),
        wmfb_stages=stages,
        seed=int(rng.integers(0, 1000)),
        hfe_tie=str(rng.choice(["inclusive", "strict"])),
        ss2d_aggregation=str(rng.choice(["sum", "mean"])),
        low_mode=str(rng.choice(["lmfb", "avg"])),
        high_mode=str(rng.choice(["hfe", "avg"])),
        head_aggregate=str(rng.choice(["sum", "concat"])),
        head_channels=int(rng.integers(2, 9)),
        expansion=int(rng.integers(1, 3)),
        d_state=2,
    )


def test_end_to_end_shape_contract(report, monkeypatch):
    rng = np.random.default_rng(5)
    mismatches = 0
    for _ in range(50):
        cfg = _random_valid_config(rng)
        pred = predicted_shapes(cfg.height, cfg.width, cfg.channels, cfg.wmfb_stages, cfg.head_channels)
        assert pred is not None
        rgb = rng.uniform(size=(3, cfg.height, cfg.width)).astype(np.float32)
        ir = rng.uniform(size=(1, cfg.height, cfg.width)).astype(np.float32)
        out = wave_forward(rgb, ir, init_wave_weights(cfg), cfg)
        got = ([lvl.low_rgb.shape for lvl in out.levels], [m.shape for m in out.maps])
        mismatches += got != pred

    calls = []
    real_stage = pipeline.stage_forward
    monkeypatch.setattr(pipeline, "stage_forward", lambda *a: calls.append(1) or real_stage(*a))
    weights = init_wave_weights(PipelineConfig(d_state=2))
    rejected = 0
    invalid = 0
    for _ in range(30):
        stages = tuple(sorted(rng.choice(np.arange(1, 6), size=3, replace=False).tolist()))
        r = int(rng.integers(0, stages[-1] + 1))
        h = (2 * int(rng.integers(0, 4)) + 1) * 2 ** r  # odd at some point of the chain
        cfg = PipelineConfig(height=h, width=64, wmfb_stages=stages, d_state=2)
        assert predicted_shapes(h, 64, cfg.channels, stages, cfg.head_channels) is None
        invalid += 1
        try:
            wave_forward(np.zeros((3, h, 64), np.float32), np.zeros((1, h, 64), np.float32), weights, cfg)
        except ConfigError:
            rejected += 1
    ok = mismatches == 0 and rejected == invalid and not calls
    report("end-to-end shape contract", ok,
           f"50 valid configs, {mismatches} mismatches; {rejected}/{invalid} invalid rejected, {len(calls)} stage calls")
    assert ok


def test_directional_entropy_property(report):
    high_ok = low_ok = 0
    for seed in range(100):
        sharp, blurred = synth_pair("blur-complement", (64, 64), seed)
        a, b = entropy_report(sharp), entropy_report(blurred)
        high_ok += a.high_entropy > b.high_entropy
        low_ok += b.low_energy_share > a.low_energy_share
    ok = high_ok >= 95 and low_ok >= 95
    report("sub-band entropy directional property", ok,
           f"sharp high-band entropy higher in {high_ok}/100, blurred LL share higher in {low_ok}/100 (>= 95)")
    assert ok


def test_strategy_comparator_ordering(report):
    rng = np.random.default_rng(3)
    pairs = []
    for seed in range(30):
        for kind in ("blur-complement", "checker-smooth", "noise"):
            pairs.append(synth_pair(kind, (16, 16), seed, (2, 2)))
        rgb = rng.standard_normal((2, 16, 16)).astype(np.float32)
        pairs.append((rgb, box_blur(rgb, 3)))
    metrics = per_pair_metrics(pairs, None, 64, strategies=[("avg", "avg"), ("hfe", "avg")])
    violations = sum(m[("hfe", "avg")]["high_energy"] < m[("avg", "avg")]["high_energy"] for m in metrics)
    elementwise = 0
    for rgb, ir in pairs:
        for a, b in zip(dwt2_haar(rgb).details, dwt2_haar(ir).details):
            elementwise += int(np.sum(np.abs(hfe_band(a, b)) < np.abs(0.5 * (a + b))))
    ok = violations == 0 and elementwise == 0
    report("strategy comparator ordering", ok,
           f"{len(pairs)} pairs, energy violations={violations}, elementwise violations={elementwise}")
    assert ok


def test_idwt_head_information(report):
    rng = np.random.default_rng(17)
    shapes = [(3, 8, 8), (4, 4, 4), (5, 2, 2)]
    out_ch = 6
    min_diff = np.inf
    for trial in range(60):
        proj = [rng.standard_normal((out_ch, c + (out_ch if j < 2 else 0))).astype(np.float32)
                for j, (c, _, _) in enumerate(shapes)]
        head = HeadWeights(proj, [np.zeros(out_ch, np.float32)] * 3)
        levels = []
        for c, h, w in shapes:
            low = rng.standard_normal((2, c, h, w)).astype(np.float32)
            levels.append(FusedLevel(low[0], low[1], Details(*np.zeros((3, c, h, w), np.float32))))
        j = trial % 3
        c, h, w = shapes[j]
        band = levels[j].high[int(rng.integers(0, 3))]
        band[int(rng.integers(0, c)), int(rng.integers(0, h)), int(rng.integers(0, w))] = rng.choice([-1, 1]) * 0.25
        a = head_forward(levels, head, upsample="idwt")
        b = head_forward(levels, head, upsample="nearest")
        min_diff = min(min_diff, max(float(np.max(np.abs(x - y))) for x, y in zip(a.maps, b.maps)))
    cfg = PipelineConfig(d_state=4)
    weights = init_wave_weights(cfg)
    rgb, ir = synth_pair("blur-complement", (64, 64), 0)
    full = wave_forward(rgb, ir, weights, cfg)
    ablated = wave_forward(rgb, ir, weights, PipelineConfig(d_state=4, head_upsample="nearest"))
    e2e = max(float(np.max(np.abs(x - y))) for x, y in zip(full.maps, ablated.maps))
    ok = min_diff > 0 and e2e > 0
    report("IDWT head information property", ok,
           f"min L-inf over 60 single-coefficient trials {min_diff:.3e} > 0; pipeline L-inf {e2e:.3e}")
    assert ok


def test_cli_pipeline_determinism(tmp_path, report, capsys):
    outputs = []
    for run in ("a", "b"):
        cfg = tmp_path / f"{run}.json"
        cfg.write_text(json.dumps({"output_dir": f"out_{run}", "seed": 42,
                                   "synth": {"kind": "blur-complement", "channels": [3, 1]}}))
        assert main(["pipeline", "--config", str(cfg)]) == 0
        outputs.append({p.name: p.read_bytes() for p in sorted((tmp_path / f"out_{run}").glob("*.wmt"))})
    capsys.readouterr()
    ok = outputs[0].keys() == outputs[1].keys() and len(outputs[0]) > 0 and outputs[0] == outputs[1]
    report("pipeline determinism", ok, f"{len(outputs[0])} TensorFiles bitwise identical across two runs")
    assert ok


def test_dwt_performance_smoke(report):
    x = np.random.default_rng(0).standard_normal((3, 640, 640)).astype(np.float32)
    dwt2_haar(x)
    samples = []
    for _ in range(10):
        t0 = time.perf_counter()
        dwt2_haar(x)
        samples.append((time.perf_counter() - t0) * 1e3)
    median = float(np.median(samples))
    fast = median < 50.0
    if not fast:
        warnings.warn(f"dwt2_haar on 3x640x640 took {median:.1f} ms (informational threshold 50 ms)")
    report("dwt performance smoke (informational)", True,
           f"median {median:.2f} ms {'<' if fast else '>='} 50 ms" + ("" if fast else " - WARNING"))
