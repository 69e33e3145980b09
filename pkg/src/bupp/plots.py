"""Figures rendered from experiment CSV records.

The CSV stays the machine-readable contract; these are the human view,
written next to it by `bupp report` or `bupp experiment --figures-dir`.
"""

from __future__ import annotations

from collections import defaultdict
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .experiment import ExperimentRecord


def _by_budget(records: list[ExperimentRecord]) -> dict[int, np.ndarray]:
    groups = defaultdict(list)
    for r in records:
        groups[r.budget].append(r.revenue_loss)
    return {b: np.array(v) for b, v in sorted(groups.items())}


def learning_curve(records: list[ExperimentRecord], path: Path) -> None:
    groups = _by_budget(records)
    budgets = list(groups)
    means = [g.mean() for g in groups.values()]
    sems = [
        g.std(ddof=1) / np.sqrt(len(g)) if len(g) > 1 else 0.0
        for g in groups.values()
    ]
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.errorbar(budgets, means, yerr=sems, marker="o", capsize=3)
    if len(budgets) > 1 and budgets[0] > 0:
        ax.set_xscale("log")
    ax.set_xlabel("budget")
    ax.set_ylabel("mean revenue loss")
    ax.set_title("Revenue loss vs learning budget")
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def loss_spread(records: list[ExperimentRecord], path: Path) -> None:
    groups = _by_budget(records)
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.boxplot(
        list(groups.values()), tick_labels=[str(b) for b in groups], whis=(5, 95)
    )
    ax.set_xlabel("budget")
    ax.set_ylabel("revenue loss")
    ax.set_title("Per-trial loss spread")
    ax.grid(True, axis="y", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_report(records: list[ExperimentRecord], out_dir: str | Path) -> list[Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = [out / "learning_curve.png", out / "loss_spread.png"]
    learning_curve(records, paths[0])
    loss_spread(records, paths[1])
    return paths
