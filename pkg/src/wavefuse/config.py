"""JSON run configuration for the CLI.

The document is flat: every PipelineConfig field may appear at top level,
alongside the run-level keys below. Unknown keys are rejected.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field
from pathlib import Path

from .analysis import BASELINE, STRATEGY_PAIRS
from .errors import ConfigError
from .pipeline import PipelineConfig, plan_pipeline
from .synth import KINDS

_PIPELINE_FIELDS = {f.name: f for f in dataclasses.fields(PipelineConfig)}
_RUN_KEYS = {"inputs", "pairs", "synth", "output_dir", "bins", "strategies", "threads"}
_SYNTH_KEYS = {"kind", "count", "size", "channels"}


@dataclass
class RunConfig:
    pipeline: PipelineConfig
    output_dir: Path
    inputs: dict[str, Path] | None = None
    pairs: list[tuple[Path, Path]] = field(default_factory=list)
    synth: dict | None = None
    bins: int = 256
    strategies: list[tuple[str, str]] = field(default_factory=lambda: [BASELINE, *STRATEGY_PAIRS])
    threads: int = 1

    @property
    def seed(self) -> int:
        return self.pipeline.seed


def _int(key, v, minimum=1):
    if not isinstance(v, int) or isinstance(v, bool) or v < minimum:
        raise ConfigError(f"{key}: expected an integer >= {minimum}, got {v!r}")
    return v


def _existing(key, raw, base: Path) -> Path:
    if not isinstance(raw, str):
        raise ConfigError(f"{key}: expected a path string, got {raw!r}")
    p = Path(raw)
    if not p.is_absolute():
        p = base / p
    if not p.exists():
        raise ConfigError(f"{key}: path does not exist: {p}")
    return p


def _pipeline_value(key, v, default):
    if isinstance(default, bool):
        if not isinstance(v, bool):
            raise ConfigError(f"{key}: expected a boolean, got {v!r}")
        return v
    if isinstance(default, int):
        return _int(key, v, minimum=0 if key == "seed" else 1)
    if isinstance(default, float):
        if not isinstance(v, (int, float)) or isinstance(v, bool):
            raise ConfigError(f"{key}: expected a number, got {v!r}")
        return float(v)
    if isinstance(default, str):
        if not isinstance(v, str):
            raise ConfigError(f"{key}: expected a string, got {v!r}")
        return v
    if isinstance(default, tuple):
        if not isinstance(v, list) or not v:
            raise ConfigError(f"{key}: expected a non-empty list of integers, got {v!r}")
        return tuple(_int(key, i) for i in v)
    raise AssertionError(key)


def parse_config(doc: dict, base: Path = Path(".")) -> RunConfig:
    if not isinstance(doc, dict):
        raise ConfigError("config: top level must be a JSON object")
    for key in doc:
        if key not in _PIPELINE_FIELDS and key not in _RUN_KEYS:
            raise ConfigError(f"{key}: unknown config key")

    defaults = PipelineConfig()
    pipe_kwargs = {k: _pipeline_value(k, v, getattr(defaults, k)) for k, v in doc.items() if k in _PIPELINE_FIELDS}
    pipeline = PipelineConfig(**pipe_kwargs)
    plan_pipeline(pipeline)

    if "output_dir" not in doc or not isinstance(doc["output_dir"], str):
        raise ConfigError("output_dir: required path string")
    out = Path(doc["output_dir"])
    if not out.is_absolute():
        out = base / out
    if not out.parent.exists():
        raise ConfigError(f"output_dir: parent directory does not exist: {out.parent}")

    inputs = None
    if "inputs" in doc:
        raw = doc["inputs"]
        if not isinstance(raw, dict) or set(raw) != {"rgb", "ir"}:
            raise ConfigError("inputs: expected an object with exactly the keys 'rgb' and 'ir'")
        inputs = {k: _existing(f"inputs.{k}", v, base) for k, v in raw.items()}

    pairs = []
    if "pairs" in doc:
        if not isinstance(doc["pairs"], list):
            raise ConfigError("pairs: expected a list of [rgb, ir] path pairs")
        for j, pair in enumerate(doc["pairs"]):
            if not isinstance(pair, list) or len(pair) != 2:
                raise ConfigError(f"pairs[{j}]: expected [rgb, ir]")
            pairs.append((_existing(f"pairs[{j}][0]", pair[0], base), _existing(f"pairs[{j}][1]", pair[1], base)))

    synth = None
    if "synth" in doc:
        raw = doc["synth"]
        if not isinstance(raw, dict):
            raise ConfigError("synth: expected an object")
        for key in raw:
            if key not in _SYNTH_KEYS:
                raise ConfigError(f"synth.{key}: unknown config key")
        kind = raw.get("kind", "blur-complement")
        if kind not in KINDS:
            raise ConfigError(f"synth.kind: expected one of {KINDS}, got {kind!r}")
        size = raw.get("size", [pipeline.height, pipeline.width])
        if not isinstance(size, list) or len(size) != 2:
            raise ConfigError(f"synth.size: expected [height, width], got {size!r}")
        channels = raw.get("channels", [1, 1])
        if not isinstance(channels, list) or len(channels) != 2:
            raise ConfigError(f"synth.channels: expected [rgb, ir], got {channels!r}")
        synth = {
            "kind": kind,
            "count": _int("synth.count", raw.get("count", 8)),
            "size": tuple(_int("synth.size", s) for s in size),
            "channels": tuple(_int("synth.channels", c) for c in channels),
        }

    strategies = [BASELINE, *STRATEGY_PAIRS]
    if "strategies" in doc:
        raw = doc["strategies"]
        allowed = [BASELINE, *STRATEGY_PAIRS]
        if not isinstance(raw, list) or not raw:
            raise ConfigError("strategies: expected a non-empty list of [high, low] pairs")
        strategies = []
        for s in raw:
            t = tuple(s) if isinstance(s, list) else None
            if t not in allowed:
                raise ConfigError(f"strategies: {s!r} is not one of {[list(a) for a in allowed]}")
            strategies.append(t)

    return RunConfig(
        pipeline=pipeline,
        output_dir=out,
        inputs=inputs,
        pairs=pairs,
        synth=synth,
        bins=_int("bins", doc.get("bins", 256), minimum=2),
        strategies=strategies,
        threads=_int("threads", doc.get("threads", 1)),
    )


def load_config(path) -> RunConfig:
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except FileNotFoundError:
        raise ConfigError(f"config: file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config: invalid JSON ({exc})") from None
    return parse_config(doc, base=path.parent)
