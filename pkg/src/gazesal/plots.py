"""Report figures. Everything goes through the Agg backend and is written with
fixed dpi and no software/date metadata, so identical inputs give identical PNGs."""

from __future__ import annotations

from typing import Mapping, Optional, Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .metrics import METRIC_FIELDS as METRIC_NAMES  # noqa: E402
from .saliency import SaliencyMap  # noqa: E402

DPI = 100

_STYLE = {
    "font.size": 8,
    "axes.titlesize": 8,
    "axes.labelsize": 8,
    "legend.fontsize": 7,
    "xtick.labelsize": 7,
    "ytick.labelsize": 7,
    "svg.hashsalt": "gazesal",
}


def _save(fig, path) -> None:
    fig.savefig(path, dpi=DPI, metadata={"Software": None})
    plt.close(fig)


def group_grid(maps: Mapping[str, Optional[SaliencyMap]], path, title: str = "", ncols: int = 3, cmap: str = "jet") -> None:
    """Side-by-side heatmaps, one panel per group; ``None`` panels read "no data"."""
    labels = list(maps)
    nrows = max(1, -(-len(labels) // ncols))
    with plt.rc_context(_STYLE):
        fig, axes = plt.subplots(nrows, ncols, figsize=(2.6 * ncols, 1.7 * nrows), squeeze=False)
        for ax in axes.ravel():
            ax.set_axis_off()
        for ax, label in zip(axes.ravel(), labels):
            smap = maps[label]
            if smap is None:
                ax.text(0.5, 0.5, "no data", ha="center", va="center", transform=ax.transAxes)
            else:
                ax.imshow(smap.values, cmap=cmap, interpolation="nearest")
            ax.set_title(label)
        if title:
            fig.suptitle(title)
        fig.tight_layout()
        _save(fig, path)


def metric_bars(rows: Sequence[Mapping], path, label_key: str = "group", title: str = "") -> None:
    """One small bar chart per metric across the labelled rows."""
    labels = [str(r[label_key]) for r in rows]
    x = np.arange(len(labels))
    with plt.rc_context(_STYLE):
        fig, axes = plt.subplots(1, len(METRIC_NAMES), figsize=(2.0 * len(METRIC_NAMES), 2.4))
        for ax, m in zip(axes, METRIC_NAMES):
            ax.bar(x, [float(r[m]) for r in rows], color="0.4")
            ax.set_title(m.upper())
            ax.set_xticks(x)
            ax.set_xticklabels(labels, rotation=60, ha="right")
        if title:
            fig.suptitle(title)
        fig.tight_layout()
        _save(fig, path)


def sweep_lines(rows: Sequence[Mapping], x_key: str, series_key: str, path, title: str = "") -> None:
    """Metric curves against ``x_key``, one line per value of ``series_key``."""
    series = sorted({r[series_key] for r in rows})
    with plt.rc_context(_STYLE):
        fig, axes = plt.subplots(1, len(METRIC_NAMES), figsize=(2.0 * len(METRIC_NAMES), 2.2))
        for ax, m in zip(axes, METRIC_NAMES):
            for s in series:
                sub = sorted((r for r in rows if r[series_key] == s), key=lambda r: float(r[x_key]))
                ax.plot([float(r[x_key]) for r in sub], [float(r[m]) for r in sub], marker="o", label=f"{series_key}={s}")
            ax.set_title(m.upper())
            ax.set_xlabel(x_key)
        axes[0].legend()
        if title:
            fig.suptitle(title)
        fig.tight_layout()
        _save(fig, path)


def training_curves(trace, path, window: int = 50) -> None:
    """Moving averages of reward, validity, nearest-neighbour distance and KL."""
    keys = ("mean_reward", "valid_rate", "mean_nn_dist", "mean_kl")
    with plt.rc_context(_STYLE):
        fig, axes = plt.subplots(1, len(keys), figsize=(9.0, 2.2))
        for ax, k in zip(axes, keys):
            y = np.asarray(getattr(trace, k), dtype=float)
            if len(y):
                w = max(1, min(window, len(y)))
                y = np.where(np.isfinite(y), y, np.nan)
                sm = np.array([np.nanmean(y[max(0, i - w + 1) : i + 1]) if np.isfinite(y[max(0, i - w + 1) : i + 1]).any() else np.nan for i in range(len(y))])
                ax.plot(np.arange(len(y)), sm, lw=1, color="k")
            ax.set_title(k)
            ax.set_xlabel("iteration")
        fig.tight_layout()
        _save(fig, path)
