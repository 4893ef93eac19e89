"""Matplotlib renderers for the report path.

Figures are written next to the delimited outputs.  Rendering is pure:
the same tables and metrics produce the same PNG bytes.
"""

from __future__ import annotations

import math
import os

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from .evaluation import EvalReport
from .schema import DiscreteTable

_REAL_COLOR = "#33557f"
_SYNTH_COLOR = "#d08a2e"


def _marginal(table: DiscreteTable, j: int) -> np.ndarray:
    card = table.schema[j].cardinality
    if table.n_rows == 0:
        return np.zeros(card)
    return np.bincount(table.column(j), minlength=card) / table.n_rows


def render_marginal_grid(real: DiscreteTable, synth: DiscreteTable, path: str) -> None:
    m = real.m
    ncols = 2 if m > 1 else 1
    nrows = math.ceil(m / ncols)
    fig, axes = plt.subplots(nrows, ncols, figsize=(6.0 * ncols, 2.6 * nrows), squeeze=False)
    for j in range(m):
        ax = axes[j // ncols][j % ncols]
        attr = real.schema[j]
        x = np.arange(attr.cardinality)
        ax.bar(x - 0.2, _marginal(real, j), width=0.4, color=_REAL_COLOR, label="real")
        ax.bar(x + 0.2, _marginal(synth, j), width=0.4, color=_SYNTH_COLOR, label="synthetic")
        ax.set_title(attr.name, fontsize=9)
        ax.set_xticks(x)
        ax.set_xticklabels(attr.domain, rotation=45, ha="right", fontsize=6)
        ax.tick_params(axis="y", labelsize=7)
        if j == 0:
            ax.legend(fontsize=7)
    for j in range(m, nrows * ncols):
        axes[j // ncols][j % ncols].axis("off")
    fig.suptitle("Per-attribute marginals: real vs synthetic", fontsize=11)
    fig.tight_layout(rect=(0, 0, 1, 0.97))
    fig.savefig(path, dpi=120)
    plt.close(fig)


def render_tvd_bars(names, tvds, path: str) -> None:
    fig, ax = plt.subplots(figsize=(max(4.0, 0.8 * len(names)), 3.2))
    x = np.arange(len(names))
    ax.bar(x, tvds, color=_SYNTH_COLOR)
    ax.set_xticks(x)
    ax.set_xticklabels(names, rotation=45, ha="right", fontsize=7)
    ax.set_ylabel("total variation distance")
    ax.set_ylim(0.0, max(0.1, float(max(tvds)) * 1.25) if len(tvds) else 0.1)
    ax.set_title("Marginal fidelity per attribute", fontsize=11)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def render_accuracy_bars(report: EvalReport, path: str) -> None:
    fig, ax = plt.subplots(figsize=(4.2, 3.2))
    names = ["logistic", "linear SVM"]
    means = [report.lr_accuracy, report.svm_accuracy]
    sds = [report.lr_sd, report.svm_sd]
    ax.bar(names, means, yerr=sds, capsize=4, color=[_REAL_COLOR, _SYNTH_COLOR])
    ax.axhline(0.5, linestyle="--", linewidth=1, color="gray", label="indistinguishable")
    ax.set_ylim(0.0, 1.0)
    ax.set_ylabel("held-out accuracy")
    ax.set_title(f"Real-vs-synthetic classifiers ({report.folds} folds)", fontsize=11)
    ax.legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def render_all(real: DiscreteTable, synth: DiscreteTable, report: EvalReport, out_dir: str) -> list[str]:
    os.makedirs(out_dir, exist_ok=True)
    paths = [
        os.path.join(out_dir, "marginals.png"),
        os.path.join(out_dir, "tvd.png"),
        os.path.join(out_dir, "distinguishability.png"),
    ]
    render_marginal_grid(real, synth, paths[0])
    render_tvd_bars([a.name for a in real.schema], list(report.tvd), paths[1])
    render_accuracy_bars(report, paths[2])
    return paths
