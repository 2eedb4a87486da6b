"""Render metric reports as bar-chart figures next to the CSV summaries."""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

from .evaluation import CLASSIFICATION_TASKS, MetricReport  # noqa: E402


def _bar_positions(n_groups: int, n_series: int, width: float = 0.8):
    step = width / n_series
    offsets = [(-width / 2) + step * (i + 0.5) for i in range(n_series)]
    return [[g + off for g in range(n_groups)] for off in offsets]


def render_multiplication_figure(reports: Sequence[MetricReport], path: str | Path) -> None:
    strategies = [r.strategy for r in reports]
    fig, (ax_acc, ax_ed) = plt.subplots(1, 2, figsize=(10, 4))
    ax_acc.bar(strategies, [r.exact_match_rate for r in reports], color="#4878d0")
    ax_acc.set_ylabel("exact match rate")
    ax_acc.set_ylim(0, 1.05)
    ax_ed.bar(strategies, [r.mean_edit_distance for r in reports], color="#d65f5f")
    ax_ed.set_ylabel("mean edit distance")
    for ax in (ax_acc, ax_ed):
        ax.set_xlabel("strategy")
        ax.grid(axis="y", linestyle="--", alpha=0.4)
    fig.suptitle("long-integer multiplication")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_classification_figure(reports: Sequence[MetricReport], path: str | Path) -> None:
    task = reports[0].task_kind
    metrics = ["f1", "g_mean" if task == "factcheck" else "accuracy",
               "precision", "recall"]
    strategies = [r.strategy for r in reports]
    positions = _bar_positions(len(strategies), len(metrics))
    fig, ax = plt.subplots(figsize=(max(6, 1.8 * len(strategies)), 4))
    width = 0.8 / len(metrics)
    for metric, xs in zip(metrics, positions):
        ax.bar(xs, [getattr(r, metric) for r in reports], width=width, label=metric)
    ax.set_xticks(range(len(strategies)))
    ax.set_xticklabels(strategies)
    ax.set_ylim(0, 1.05)
    ax.set_xlabel("strategy")
    ax.set_ylabel("score")
    ax.set_title(task)
    ax.legend(fontsize=8)
    ax.grid(axis="y", linestyle="--", alpha=0.4)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_report_figures(reports: Sequence[MetricReport], outdir: str | Path) -> list[Path]:
    """One figure per task kind present in the reports; returns written paths."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    written = []
    by_task: dict[str, list[MetricReport]] = {}
    for report in reports:
        by_task.setdefault(report.task_kind, []).append(report)
    for task, group in sorted(by_task.items()):
        path = outdir / f"{task}_metrics.png"
        if task in CLASSIFICATION_TASKS:
            render_classification_figure(group, path)
        else:
            render_multiplication_figure(group, path)
        written.append(path)
    return written
