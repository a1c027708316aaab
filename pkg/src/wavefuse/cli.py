"""wavefuse command-line front end.

Exit codes: 0 ok, 1 usage or configuration error, 2 data error.
"""

from __future__ import annotations

import argparse
import json
import re
import sys
from pathlib import Path

import numpy as np

from . import parallel
from .analysis import compare_strategies, entropy_report
from .config import RunConfig, load_config
from .errors import ConfigError, WaveFuseError
from .fusion import init_wmfb_weights, wmfb
from .io import load_feature_map, write_tensor, read_tensor
from .synth import KINDS, synth_pair
from .wavelet import SubBands, dwt2_haar, dwt2_multilevel, idwt2_haar, idwt2_multilevel

EXIT_USAGE = 1
EXIT_DATA = 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _size(text: str) -> tuple[int, int]:
    m = re.fullmatch(r"(\d+)x(\d+)", text)
    if not m:
        raise argparse.ArgumentTypeError(f"expected HxW, got {text!r}")
    return int(m.group(1)), int(m.group(2))


def _emit(records, path: Path | None = None) -> None:
    lines = [json.dumps(r, sort_keys=True) for r in records]
    for line in lines:
        print(line)
    if path is not None:
        path.write_text("".join(line + "\n" for line in lines))


def _band_path(prefix: str, level: int, band: str) -> Path:
    return Path(f"{prefix}.l{level}.{band}.wmt")


def cmd_dwt(args) -> None:
    x = load_feature_map(args.input)
    levels = dwt2_multilevel(x, args.levels)
    records = []
    for k, bands in enumerate(levels, start=1):
        for name, band in zip(SubBands._fields, bands):
            path = _band_path(args.out_prefix, k, name)
            write_tensor(path, band)
            records.append({"level": k, "band": name, "shape": list(band.shape), "path": str(path)})
    _emit(records)


def cmd_idwt(args) -> None:
    levels = []
    k = 1
    while _band_path(args.prefix, k, "lh").exists():
        levels.append(k)
        k += 1
    if not levels:
        raise FileNotFoundError(f"no sub-band files found for prefix {args.prefix!r}")
    deepest = levels[-1]
    bands = []
    for k in levels:
        ll = read_tensor(_band_path(args.prefix, k, "ll")) if k == deepest else None
        details = [read_tensor(_band_path(args.prefix, k, n)) for n in ("lh", "hl", "hh")]
        bands.append(SubBands(ll if ll is not None else details[0], *details))
    x = idwt2_multilevel(bands)
    write_tensor(args.output, x)
    _emit([{"levels": len(levels), "shape": list(x.shape), "path": str(args.output)}])


def _modality_inputs(cfg: RunConfig):
    if cfg.inputs is not None:
        return load_feature_map(cfg.inputs["rgb"]), load_feature_map(cfg.inputs["ir"])
    if cfg.synth is not None:
        s = cfg.synth
        return synth_pair(s["kind"], s["size"], cfg.seed, s["channels"])
    raise ConfigError("inputs: required (or provide synth)")


def _match_channels(rgb, ir):
    if rgb.shape[0] != ir.shape[0] and ir.shape[0] == 1:
        ir = np.repeat(ir, rgb.shape[0], axis=0)
    return rgb, ir


def cmd_fuse(args) -> None:
    cfg = load_config(args.config)
    parallel.set_threads(cfg.threads)
    rgb, ir = _match_channels(*_modality_inputs(cfg))
    p = cfg.pipeline
    weights = init_wmfb_weights(np.random.default_rng(p.seed), rgb.shape[0], p.expansion, p.d_state,
                                swap_fraction=p.swap_fraction, hfe_mode=p.hfe_tie, tied_paths=p.tied_dfm_paths,
                                shared_scan=p.shared_scan, aggregation=p.ss2d_aggregation)
    br, bi = dwt2_haar(rgb), dwt2_haar(ir)
    lvl = wmfb(br.ll, bi.ll, br.details, bi.details, weights, low_mode=p.low_mode, high_mode=p.high_mode)
    fused = idwt2_haar(SubBands(lvl.low_rgb + lvl.low_ir, *lvl.high))
    cfg.output_dir.mkdir(exist_ok=True)
    outputs = {"low_rgb": lvl.low_rgb, "low_ir": lvl.low_ir, "lh": lvl.high.lh, "hl": lvl.high.hl,
               "hh": lvl.high.hh, "fused": fused}
    records = []
    for name, arr in outputs.items():
        path = cfg.output_dir / f"{name}.wmt"
        write_tensor(path, arr)
        records.append({"tensor": name, "shape": list(arr.shape), "path": str(path)})
    _emit(records, cfg.output_dir / "fuse.jsonl")


def cmd_entropy(args) -> None:
    x = load_feature_map(args.input)
    rep = entropy_report(x, args.bins)
    out = Path(args.out) if args.out else None
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
    _emit(rep.records(label=str(args.input)), out / "entropy.jsonl" if out else None)
    if out is not None:
        from .plotting import plot_entropy

        plot_entropy({Path(args.input).name: rep}, out / "entropy.png")


def _compare_pairs(cfg: RunConfig):
    pairs = [_match_channels(load_feature_map(a), load_feature_map(b)) for a, b in cfg.pairs]
    if cfg.synth is not None:
        s = cfg.synth
        pairs += [synth_pair(s["kind"], s["size"], cfg.seed + j, s["channels"]) for j in range(s["count"])]
    if not pairs:
        raise ConfigError("pairs: required (or provide synth)")
    return pairs


def cmd_compare(args) -> None:
    cfg = load_config(args.config)
    parallel.set_threads(cfg.threads)
    pairs = _compare_pairs(cfg)
    p = cfg.pipeline
    weights = init_wmfb_weights(np.random.default_rng(p.seed), pairs[0][0].shape[0], p.expansion, p.d_state,
                                swap_fraction=p.swap_fraction, hfe_mode=p.hfe_tie, tied_paths=p.tied_dfm_paths,
                                shared_scan=p.shared_scan, aggregation=p.ss2d_aggregation)
    matrix = compare_strategies(pairs, weights, cfg.bins, cfg.strategies)
    cfg.output_dir.mkdir(exist_ok=True)
    _emit(matrix.records(), cfg.output_dir / "compare.jsonl")
    from .plotting import plot_strategies

    plot_strategies(matrix, cfg.output_dir / "compare.png")


def cmd_pipeline(args) -> None:
    from .pipeline import init_wave_weights, wave_forward

    cfg = load_config(args.config)
    parallel.set_threads(cfg.threads)
    p = cfg.pipeline
    rgb, ir = _modality_inputs(cfg)
    weights = init_wave_weights(p)
    out = wave_forward(rgb, ir, weights, p)
    cfg.output_dir.mkdir(exist_ok=True)
    records = []
    for j, m in enumerate(out.maps):
        path = cfg.output_dir / f"p{j}.wmt"
        write_tensor(path, m)
        records.append({"output": f"p{j}", "shape": list(m.shape), "path": str(path)})
    for j, lvl in enumerate(out.levels):
        for name, arr in (("low_rgb", lvl.low_rgb), ("low_ir", lvl.low_ir), *zip(("lh", "hl", "hh"), lvl.high)):
            path = cfg.output_dir / f"level{j}.{name}.wmt"
            write_tensor(path, arr)
            records.append({"output": f"level{j}.{name}", "shape": list(arr.shape), "path": str(path)})
    _emit(records, cfg.output_dir / "pipeline.jsonl")
    from .plotting import plot_pyramid

    plot_pyramid(out.maps, cfg.output_dir / "pyramid.png")


def cmd_bench(args) -> None:
    from .bench import run_bench

    records = run_bench(args.size, args.iters)
    _emit(records)
    for r in records:
        if r.get("ok") is False:
            print(f"wavefuse: warning: {r['op']} median {r['median_ms']:.1f} ms exceeds "
                  f"{r['threshold_ms']:.0f} ms", file=sys.stderr)


def cmd_synth(args) -> None:
    rgb, ir = synth_pair(args.kind, args.size, args.seed, tuple(args.channels))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    records = []
    for name, arr in (("rgb", rgb), ("ir", ir)):
        write_tensor(out / f"{name}.wmt", arr)
        records.append({"tensor": name, "shape": list(arr.shape), "path": str(out / f"{name}.wmt")})
    _emit(records)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="wavefuse", description="Wavelet / selective-scan RGB-IR feature fusion.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("dwt", help="multi-level Haar decomposition into TensorFiles")
    p.add_argument("input")
    p.add_argument("out_prefix")
    p.add_argument("--levels", type=int, default=1)
    p.set_defaults(func=cmd_dwt)

    p = sub.add_parser("idwt", help="reconstruct from sub-band TensorFiles")
    p.add_argument("prefix")
    p.add_argument("output")
    p.set_defaults(func=cmd_idwt)

    for name, func, text in (("fuse", cmd_fuse, "fuse one wavelet level of an RGB/IR pair"),
                             ("compare", cmd_compare, "compare fusion strategies"),
                             ("pipeline", cmd_pipeline, "run the end-to-end forward path")):
        p = sub.add_parser(name, help=text)
        p.add_argument("--config", required=True)
        p.set_defaults(func=func)

    p = sub.add_parser("entropy", help="per-sub-band entropy and energy report")
    p.add_argument("input")
    p.add_argument("--bins", type=int, default=256)
    p.add_argument("--out", help="directory for entropy.jsonl and entropy.png")
    p.set_defaults(func=cmd_entropy)

    p = sub.add_parser("bench", help="time dwt2_haar, ss2d and wave_forward")
    p.add_argument("--size", type=_size, default=(64, 64))
    p.add_argument("--iters", type=int, default=10)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("synth", help="write a synthetic RGB/IR pair")
    p.add_argument("--kind", choices=KINDS, required=True)
    p.add_argument("--size", type=_size, default=(64, 64))
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--channels", type=int, nargs=2, default=(3, 1), metavar=("RGB", "IR"))
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_synth)
    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        if getattr(args, "levels", 1) < 1 or getattr(args, "iters", 1) < 1:
            raise UsageError("--levels and --iters must be positive")
        args.func(args)
    except (UsageError, ConfigError) as exc:
        _fail(exc)
        return EXIT_USAGE
    except (WaveFuseError, OSError, ValueError) as exc:
        _fail(exc)
        return EXIT_DATA
    return 0


def _fail(exc: Exception) -> None:
    msg = " ".join(str(exc).split())
    print(f"wavefuse: error: {msg}", file=sys.stderr)


if __name__ == "__main__":
    sys.exit(main())
