"""Report figures. Rendered off-screen to files next to the JSONL output."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .analysis import BAND_NAMES  # noqa: E402

RC = {
    "font.size": 9,
    "axes.labelsize": 9,
    "axes.titlesize": 10,
    "legend.fontsize": 8,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "savefig.dpi": 120,
    "savefig.bbox": "tight",
}


def _save(fig, path):
    fig.savefig(path, metadata={"Software": None})
    plt.close(fig)


def plot_entropy(reports: dict, path) -> None:
    """Grouped bars of per-band entropy and energy share, one group per source."""
    with plt.rc_context(RC):
        fig, (ax_h, ax_e) = plt.subplots(1, 2, figsize=(7.0, 2.8))
        x = np.arange(len(BAND_NAMES))
        width = 0.8 / max(len(reports), 1)
        for j, (label, rep) in enumerate(reports.items()):
            off = (j - (len(reports) - 1) / 2) * width
            ax_h.bar(x + off, [rep.entropy[b] for b in BAND_NAMES], width, label=label)
            ax_e.bar(x + off, [rep.energy_share[b] for b in BAND_NAMES], width, label=label)
        for ax, title in ((ax_h, "normalized entropy"), (ax_e, "energy share")):
            ax.set_xticks(x, [b.upper() for b in BAND_NAMES])
            ax.set_ylim(0, 1.05)
            ax.set_title(title)
        ax_h.legend(frameon=False)
        _save(fig, path)


def plot_strategies(matrix, path) -> None:
    rows = [r for r in matrix.rows if r.high_energy is not None]
    with plt.rc_context(RC):
        fig, (ax_e, ax_r) = plt.subplots(1, 2, figsize=(7.0, 2.8))
        labels = [f"({r.high_mode}, {r.low_mode})" for r in rows]
        y = np.arange(len(rows))
        ax_e.barh(y, [r.high_energy for r in rows], color="tab:blue")
        ax_e.set_yticks(y, labels)
        ax_e.set_xlabel("fused high-band energy")
        ax_r.barh(y, [r.detail_retention for r in rows], color="tab:orange")
        ax_r.set_yticks(y, [])
        ax_r.set_xlim(0, 1.05)
        ax_r.set_xlabel("detail retention (proxy)")
        _save(fig, path)


def plot_pyramid(maps, path) -> None:
    """Channel-mean of each pyramid level, finest first."""
    with plt.rc_context(RC):
        fig, axes = plt.subplots(1, len(maps), figsize=(2.4 * len(maps), 2.4), squeeze=False)
        for ax, m in zip(axes[0], maps):
            ax.imshow(m.mean(axis=0), cmap="magma", interpolation="nearest")
            ax.set_title(f"{m.shape[1]}x{m.shape[2]}")
            ax.set_xticks([])
            ax.set_yticks([])
        _save(fig, path)
