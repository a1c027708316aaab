"""
Frequency-domain statistics: normalized sub-band entropy, energy shares, and a
comparator that runs one fusion level under each (high, low) strategy pair.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from . import parallel
from .errors import ShapeError
from .fusion import WmfbWeights, hfe, wmfb
from .wavelet import SubBands, check_feature_map, dwt2_haar

BAND_NAMES = SubBands._fields
STRATEGY_PAIRS = (("avg", "avg"), ("avg", "lmfb"), ("hfe", "avg"), ("hfe", "lmfb"))
BASELINE = ("baseline", "baseline")


def normalized_entropy(band: np.ndarray, bins: int = 256) -> float:
    """Shannon entropy of a min-max normalized histogram, divided by ln(bins).

    A constant band has entropy 0.
    """
    if bins < 2:
        raise ValueError(f"bins must be >= 2, got {bins}")
    v = np.asarray(band, dtype=np.float64).ravel()
    if v.size == 0:
        raise ShapeError("normalized_entropy of an empty band")
    lo, hi = v.min(), v.max()
    if hi == lo:
        return 0.0
    counts, _ = np.histogram((v - lo) / (hi - lo), bins=bins, range=(0.0, 1.0))
    p = counts[counts > 0] / v.size
    h = -float(np.sum(p * np.log(p))) / math.log(bins)
    return min(max(h, 0.0), 1.0)


@dataclass
class EntropyReport:
    entropy: dict[str, float]
    energy_share: dict[str, float]
    samples: int
    bins: int

    @property
    def high_entropy(self) -> float:
        return (self.entropy["lh"] + self.entropy["hl"] + self.entropy["hh"]) / 3.0

    @property
    def low_energy_share(self) -> float:
        return self.energy_share["ll"]

    def records(self, label: str | None = None) -> list[dict]:
        rows = []
        for name in BAND_NAMES:
            row = {"band": name, "entropy": self.entropy[name], "energy_share": self.energy_share[name],
                   "samples": self.samples, "bins": self.bins}
            if label is not None:
                row = {"source": label, **row}
            rows.append(row)
        return rows


def energy_shares(bands: SubBands) -> dict[str, float]:
    energies = [float(np.sum(np.square(b, dtype=np.float64))) for b in bands]
    total = math.fsum(energies)
    if total == 0.0:
        return {name: 0.25 for name in BAND_NAMES}
    return {name: e / total for name, e in zip(BAND_NAMES, energies)}


def entropy_report(x: np.ndarray, bins: int = 256) -> EntropyReport:
    check_feature_map(x)
    bands = dwt2_haar(x)
    return EntropyReport(
        entropy={name: normalized_entropy(b, bins) for name, b in zip(BAND_NAMES, bands)},
        energy_share=energy_shares(bands),
        samples=int(bands.ll.size),
        bins=bins,
    )


@dataclass
class StrategyMetrics:
    high_mode: str
    low_mode: str
    high_entropy: float | None
    high_energy: float | None
    low_entropy: float
    low_energy: float
    # exact-match fraction against the abs-max oracle; an artifact-defined proxy
    detail_retention: float | None
    pairs: int


@dataclass
class StrategyMatrix:
    rows: list[StrategyMetrics]

    def get(self, high_mode: str, low_mode: str) -> StrategyMetrics:
        for row in self.rows:
            if (row.high_mode, row.low_mode) == (high_mode, low_mode):
                return row
        raise KeyError((high_mode, low_mode))

    def records(self) -> list[dict]:
        return [{**asdict(r), "detail_retention_is_proxy": True} for r in self.rows]


def _energy(arrays) -> float:
    return math.fsum(float(np.sum(np.square(a, dtype=np.float64))) for a in arrays)


def _pair_metrics(rgb: np.ndarray, ir: np.ndarray, weights: WmfbWeights | None, bins: int,
                  strategies) -> dict[tuple[str, str], dict]:
    br, bi = dwt2_haar(rgb), dwt2_haar(ir)
    oracle = hfe(br.details, bi.details, "inclusive")
    out = {}
    for high_mode, low_mode in strategies:
        if (high_mode, low_mode) == BASELINE:
            fused = 0.5 * (rgb + ir)
            out[BASELINE] = dict(high_entropy=None, high_energy=None,
                                 low_entropy=normalized_entropy(fused, bins), low_energy=_energy([fused]),
                                 detail_retention=None)
            continue
        lvl = wmfb(br.ll, bi.ll, br.details, bi.details, weights, low_mode=low_mode, high_mode=high_mode)
        match = sum(int(np.count_nonzero(a == b)) for a, b in zip(lvl.high, oracle))
        total = sum(a.size for a in oracle)
        low = lvl.low_rgb + lvl.low_ir
        out[(high_mode, low_mode)] = dict(
            high_entropy=float(np.mean([normalized_entropy(b, bins) for b in lvl.high])),
            high_energy=_energy(lvl.high),
            low_entropy=normalized_entropy(low, bins),
            low_energy=_energy([lvl.low_rgb, lvl.low_ir]),
            detail_retention=match / total,
        )
    return out


def per_pair_metrics(pairs, weights: WmfbWeights | None, bins: int = 256,
                     strategies=(BASELINE, *STRATEGY_PAIRS)) -> list[dict]:
    """Metrics for each input pair separately, in input order."""
    pairs = list(pairs)
    for rgb, ir in pairs:
        check_feature_map(rgb, "rgb")
        check_feature_map(ir, "ir")
        if rgb.shape != ir.shape:
            raise ShapeError(f"pair shape mismatch {rgb.shape} vs {ir.shape}")
    if any(low == "lmfb" for _, low in strategies) and weights is None:
        raise ValueError("lmfb strategies need WMFB weights")
    return parallel.ordered_map(lambda p: _pair_metrics(p[0], p[1], weights, bins, strategies), pairs)


def compare_strategies(pairs, weights: WmfbWeights | None, bins: int = 256,
                       strategies=(BASELINE, *STRATEGY_PAIRS)) -> StrategyMatrix:
    """Average per-pair metrics for the no-DWT baseline and each (high, low) pair.

    Averages use exactly rounded sums, so the result does not depend on the
    order of `pairs`. Detection accuracy is deliberately not reported.
    """
    pairs = list(pairs)
    if not pairs:
        raise ValueError("compare_strategies needs at least one input pair")
    for s in strategies:
        if s != BASELINE and s not in STRATEGY_PAIRS:
            raise ValueError(f"unknown strategy pair {s!r}")
    per_pair = per_pair_metrics(pairs, weights, bins, strategies)
    rows = []
    for s in strategies:
        agg = {}
        for key in ("high_entropy", "high_energy", "low_entropy", "low_energy", "detail_retention"):
            vals = [m[s][key] for m in per_pair]
            agg[key] = None if vals[0] is None else math.fsum(vals) / len(vals)
        rows.append(StrategyMetrics(s[0], s[1], pairs=len(pairs), **agg))
    return StrategyMatrix(rows)
