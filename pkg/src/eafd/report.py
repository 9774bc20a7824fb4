"""Evaluation report rendering: delimited metrics plus figures on disk.

``write_report`` lays down one directory per evaluation run:

    metrics.tsv               sorted-key metrics-v1 text
    cumulative_alignment.csv  index,alignment_rate rows
    figures/alignment.png     cumulative alignment curve
    figures/per_class.png     precision/recall/F1 bars per class
    figures/confusion.png     annotated confusion matrix
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be pinned first)
import numpy as np  # noqa: E402

from .metrics import CLASSES, MetricsReport  # noqa: E402


def _alignment_figure(report: MetricsReport, path: Path) -> None:
    fig, ax = plt.subplots(figsize=(6.0, 3.2))
    series = report.cumulative_alignment
    ax.plot(range(1, len(series) + 1), [100 * v for v in series],
            marker="o", markersize=3, color="#d97708", linewidth=1.4)
    ax.set_xlabel("cases processed")
    ax.set_ylabel("cumulative alignment (%)")
    ax.set_ylim(0, 105)
    ax.grid(True, alpha=0.25)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def _per_class_figure(report: MetricsReport, path: Path) -> None:
    names = [c.value for c in CLASSES]
    stats = report.per_class
    x = np.arange(len(names))
    width = 0.27
    fig, ax = plt.subplots(figsize=(6.0, 3.2))
    for offset, metric, color in ((-width, "precision", "#3b6fb6"),
                                  (0.0, "recall", "#d97708"),
                                  (width, "f1", "#4c9a62")):
        ax.bar(x + offset, [stats[n][metric] for n in names], width,
               label=metric, color=color)
    ax.set_xticks(x, [f"{n}\n(n={stats[n]['support']})" for n in names])
    ax.set_ylim(0, 1.05)
    ax.legend(loc="lower right", fontsize=8)
    ax.grid(True, axis="y", alpha=0.25)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def _confusion_figure(report: MetricsReport, path: Path) -> None:
    names = [c.value for c in CLASSES]
    matrix = np.array([[report.confusion[(t, p)] for p in names] for t in names])
    fig, ax = plt.subplots(figsize=(4.4, 3.8))
    im = ax.imshow(matrix, cmap="Oranges")
    ax.set_xticks(range(len(names)), names)
    ax.set_yticks(range(len(names)), names)
    ax.set_xlabel("predicted")
    ax.set_ylabel("actual")
    for i in range(len(names)):
        for j in range(len(names)):
            ax.text(j, i, str(matrix[i, j]), ha="center", va="center",
                    color="black" if matrix[i, j] < matrix.max() * 0.6 else "white")
    fig.colorbar(im, shrink=0.8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def write_report(report: MetricsReport, outdir) -> list[Path]:
    outdir = Path(outdir)
    figures = outdir / "figures"
    figures.mkdir(parents=True, exist_ok=True)

    paths = [outdir / "metrics.tsv"]
    paths[0].write_text(report.render(), encoding="utf-8")

    csv_path = outdir / "cumulative_alignment.csv"
    rows = ["index,alignment_rate"]
    rows += [f"{i},{v:.6f}" for i, v in enumerate(report.cumulative_alignment, start=1)]
    csv_path.write_text("\n".join(rows) + "\n", encoding="utf-8")
    paths.append(csv_path)

    for name, renderer in (("alignment.png", _alignment_figure),
                           ("per_class.png", _per_class_figure),
                           ("confusion.png", _confusion_figure)):
        target = figures / name
        renderer(report, target)
        paths.append(target)
    return paths
