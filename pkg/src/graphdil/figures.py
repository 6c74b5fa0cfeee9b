"""Report figures rendered next to the delimited output.

Three PNGs per run: the lower-triangular accuracy matrix as a heatmap,
per-domain accuracy trajectories over the sequence, and the domain
discrimination confusion matrix.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

__all__ = ["render_figures"]

_PNG_OPTS = {"dpi": 150, "metadata": {"Software": None}}


def _save(fig, path: Path) -> Path:
    fig.savefig(path, **_PNG_OPTS)
    plt.close(fig)
    return path


def _accuracy_matrix_figure(report, path: Path) -> Path:
    rows = report.matrix.rows
    t = len(rows)
    grid = np.full((t, t), np.nan)
    for i, row in enumerate(rows):
        grid[i, : len(row)] = row

    fig, ax = plt.subplots(figsize=(1.1 * t + 2.2, 1.1 * t + 1.6))
    im = ax.imshow(np.ma.masked_invalid(grid), vmin=0.0, vmax=1.0, cmap="viridis")
    for i in range(t):
        for j in range(i + 1):
            ax.text(j, i, f"{grid[i, j]:.2f}", ha="center", va="center",
                    color="white" if grid[i, j] < 0.6 else "black", fontsize=9)
    ax.set_xticks(range(t), [f"domain {j}" for j in range(t)])
    ax.set_yticks(range(t), [f"after {i}" for i in range(t)])
    ax.set_xlabel("evaluated domain")
    ax.set_ylabel("learned up to")
    ax.set_title("Accuracy matrix")
    fig.colorbar(im, ax=ax, shrink=0.8)
    fig.tight_layout()
    return _save(fig, path)


def _accuracy_curves_figure(report, path: Path) -> Path:
    rows = report.matrix.rows
    t = len(rows)
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    for j in range(t):
        steps = list(range(j, t))
        ax.plot(steps, [rows[i][j] for i in steps], marker="o", label=f"domain {j}")
    ax.set_xticks(range(t))
    ax.set_xlabel("domains learned")
    ax.set_ylabel("test accuracy")
    ax.set_ylim(0.0, 1.02)
    ax.set_title(
        f"AA = {report.average_accuracy:.3f}, AF = {report.average_forgetting:+.3f}"
    )
    ax.grid(alpha=0.3)
    ax.legend(loc="lower left", fontsize=8)
    fig.tight_layout()
    return _save(fig, path)


def _confusion_figure(report, path: Path) -> Path:
    counts = np.asarray(report.confusion, dtype=float)
    t = counts.shape[0]
    fig, ax = plt.subplots(figsize=(1.0 * t + 2.4, 1.0 * t + 1.8))
    im = ax.imshow(counts, cmap="Blues")
    for i in range(t):
        for j in range(t):
            ax.text(j, i, f"{int(counts[i, j])}", ha="center", va="center", fontsize=9)
    ax.set_xticks(range(t), [f"chose {j}" for j in range(t)])
    ax.set_yticks(range(t), [f"true {i}" for i in range(t)])
    ax.set_title("Domain discrimination (evaluation calls)")
    fig.colorbar(im, ax=ax, shrink=0.8)
    fig.tight_layout()
    return _save(fig, path)


def render_figures(report, out_dir) -> list[Path]:
    """Render all report figures into ``out_dir`` and return their paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return [
        _accuracy_matrix_figure(report, out / "accuracy_matrix.png"),
        _accuracy_curves_figure(report, out / "accuracy_curves.png"),
        _confusion_figure(report, out / "domain_confusion.png"),
    ]
