"""Report figures, rendered headless to files next to the text reports."""

from __future__ import annotations

import math
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .corpus import ARGUMENT_TYPES, StatsReport
from .evaluation import SignificanceReport

__all__ = [
    "plot_type_distribution",
    "plot_cv_metrics",
    "plot_type_eval",
    "plot_significance",
]

_DPI = 150


def _save(fig, path: str | Path, config_hash: str) -> None:
    fig.savefig(
        Path(path),
        dpi=_DPI,
        metadata={"Description": f"config {config_hash}"},
    )
    plt.close(fig)


def plot_type_distribution(stats: StatsReport, path: str | Path,
                           config_hash: str = "") -> None:
    fig, ax = plt.subplots(figsize=(5, 3.2))
    labels = [t.value for t in ARGUMENT_TYPES]
    counts = [stats.type_counts.get(t, 0) for t in ARGUMENT_TYPES]
    pct = stats.type_percentages()
    ax.bar(labels, counts, color="#4878a8")
    for i, t in enumerate(ARGUMENT_TYPES):
        ax.annotate(f"{pct[t]:.2f}%", (i, counts[i]), ha="center",
                    va="bottom", fontsize=8)
    ax.set_ylabel("supporting arguments")
    ax.set_title(f"argument types ({stats.n_supporting} supporting sentences)")
    fig.tight_layout()
    _save(fig, path, config_hash)


def plot_cv_metrics(row_names, mrr_values, ndcg_values, path: str | Path,
                    config_hash: str = "") -> None:
    """Grouped bars of MRR and NDCG (x100) per report row."""
    x = np.arange(len(row_names))
    width = 0.38
    fig, ax = plt.subplots(figsize=(max(5.0, 1.1 * len(row_names) + 2), 3.6))
    ax.bar(x - width / 2, mrr_values, width, label="MRR", color="#4878a8")
    ax.bar(x + width / 2, ndcg_values, width, label="NDCG", color="#d1605e")
    ax.set_xticks(x)
    ax.set_xticklabels(row_names, rotation=20, ha="right", fontsize=8)
    ax.set_ylabel("score x100")
    ax.set_ylim(0, 100)
    ax.legend(fontsize=8)
    ax.set_title("ranking quality by feature set")
    fig.tight_layout()
    _save(fig, path, config_hash)


def plot_type_eval(rows: dict[str, tuple[float, float]], path: str | Path,
                   config_hash: str = "") -> None:
    names = list(rows)
    x = np.arange(len(names))
    width = 0.38
    fig, ax = plt.subplots(figsize=(5.4, 3.4))
    ax.bar(x - width / 2, [rows[n][0] for n in names], width,
           label="accuracy", color="#4878a8")
    ax.bar(x + width / 2, [rows[n][1] for n in names], width,
           label="macro F1", color="#d1605e")
    ax.set_xticks(x)
    ax.set_xticklabels(names, rotation=15, ha="right", fontsize=8)
    ax.set_ylim(0, 1)
    ax.legend(fontsize=8)
    ax.set_title("argument type prediction")
    fig.tight_layout()
    _save(fig, path, config_hash)


def plot_significance(report: SignificanceReport, path: str | Path,
                      config_hash: str = "") -> None:
    """Signed significance heatmap: +/- log10 corrected p per (feature, type)."""
    features = report.features()
    matrix = np.zeros((len(features), len(ARGUMENT_TYPES)))
    for i, feature in enumerate(features):
        for j, t in enumerate(ARGUMENT_TYPES):
            cell = report.cell(feature, t)
            if cell is None or cell.status != "ok":
                continue
            magnitude = -math.log10(max(cell.p_corrected, 1e-300))
            sign = 1.0 if cell.mean_supporting >= cell.mean_other else -1.0
            matrix[i, j] = sign * magnitude
    limit = max(1.0, float(np.abs(matrix).max()))
    fig, ax = plt.subplots(
        figsize=(4.6, max(2.5, 0.28 * len(features) + 1.2))
    )
    image = ax.imshow(matrix, cmap="RdBu_r", vmin=-limit, vmax=limit,
                      aspect="auto")
    ax.set_xticks(range(len(ARGUMENT_TYPES)))
    ax.set_xticklabels([t.value for t in ARGUMENT_TYPES], fontsize=8)
    ax.set_yticks(range(len(features)))
    ax.set_yticklabels(features, fontsize=7)
    fig.colorbar(image, ax=ax, label="signed -log10 corrected p")
    ax.set_title("feature significance by argument type", fontsize=9)
    fig.tight_layout()
    _save(fig, path, config_hash)
