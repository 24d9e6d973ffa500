"""Render metric curves and their delay embeddings to image files.

Import is deferred to the report path so the numeric core stays usable
without a display stack; the Agg backend keeps rendering headless.
"""

from __future__ import annotations

import math
from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from .analysis import EpochTrace, takens_embed

_METRIC_LABELS = {"mae": "MAE", "dme": "Degree of Matthew effect"}


def save_curve_figures(traces: Sequence[EpochTrace], out_dir: str | Path) -> list[Path]:
    """One figure per metric: the per-epoch curve of every model."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = []
    epochs = range(1, traces[0].epochs + 1)
    for metric, label in _METRIC_LABELS.items():
        fig, ax = plt.subplots(figsize=(6.4, 4.0))
        for trace in traces:
            ax.plot(epochs, getattr(trace, f"{metric}_curve"), label=trace.model_tag, linewidth=1.2)
        ax.set_xlabel("epoch")
        ax.set_ylabel(label)
        ax.legend(fontsize=8)
        fig.tight_layout()
        path = out_dir / f"{metric}_curves.png"
        fig.savefig(path, dpi=120)
        plt.close(fig)
        paths.append(path)
    return paths


def save_takens_figures(
    traces: Sequence[EpochTrace], out_dir: str | Path, delay: int = 1
) -> list[Path]:
    """One figure per metric: a grid of per-model delay-embedding panels."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = []
    if traces[0].epochs <= delay:
        return paths
    n = len(traces)
    ncols = min(3, n)
    nrows = math.ceil(n / ncols)
    for metric, label in _METRIC_LABELS.items():
        fig, axes = plt.subplots(
            nrows, ncols, figsize=(3.2 * ncols, 2.8 * nrows), squeeze=False
        )
        for k, trace in enumerate(traces):
            ax = axes[k // ncols][k % ncols]
            pts = takens_embed(getattr(trace, f"{metric}_curve"), delay)
            xs = [p[0] for p in pts]
            ys = [p[1] for p in pts]
            ax.plot(xs, ys, marker="o", markersize=2.5, linewidth=0.8)
            ax.set_title(trace.model_tag, fontsize=9)
            ax.tick_params(labelsize=7)
        for k in range(n, nrows * ncols):
            axes[k // ncols][k % ncols].axis("off")
        fig.suptitle(f"{label}: delay embedding (delay={delay})", fontsize=10)
        fig.tight_layout()
        path = out_dir / f"{metric}_takens.png"
        fig.savefig(path, dpi=120)
        plt.close(fig)
        paths.append(path)
    return paths
