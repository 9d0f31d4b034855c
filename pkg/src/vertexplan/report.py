"""Figure rendering for benchmark reports and instance debugging.

Figures are written next to the delimited output: per-metric mean/std bars
and, when a baseline comparison exists, the percentage-improvement chart
over rrt_star.
"""

from __future__ import annotations

import os
from collections import defaultdict

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .gridmap import GridMap

_METRIC_LABELS = {
    "path_length": "path length [px]",
    "time_cost": "time to termination [s]",
    "iterations": "iterations to termination",
    "success_rate": "success rate",
}

# Render order for cell classes: free, obstacle, start, goal.
_CELL_COLORS = ["#f5f5f5", "#30303a", "#2ca02c", "#d62728"]


def render_summary_figures(rows, out_dir, prefix="summary") -> list[str]:
    """One grouped bar chart per metric, plus improvement-over-rrt_star bars."""
    os.makedirs(out_dir, exist_ok=True)
    by_metric = defaultdict(list)
    for r in rows:
        by_metric[r.metric].append(r)
    written = []

    for metric, metric_rows in sorted(by_metric.items()):
        algs = sorted({r.algorithm for r in metric_rows})
        sets = sorted({r.map_set for r in metric_rows})
        fig, ax = plt.subplots(figsize=(1.8 + 1.2 * len(sets) * len(algs) / 2, 3.6))
        width = 0.8 / len(algs)
        xs = np.arange(len(sets))
        lookup = {(r.algorithm, r.map_set): r for r in metric_rows}
        for ai, alg in enumerate(algs):
            means = [lookup[(alg, s)].mean if (alg, s) in lookup else np.nan for s in sets]
            stds = [(lookup[(alg, s)].std or 0.0) if (alg, s) in lookup else 0.0 for s in sets]
            ax.bar(xs + (ai - (len(algs) - 1) / 2) * width, means, width,
                   yerr=stds, capsize=3, label=alg)
        ax.set_xticks(xs)
        ax.set_xticklabels(sets)
        ax.set_ylabel(_METRIC_LABELS.get(metric, metric))
        ax.legend(fontsize=8)
        fig.tight_layout()
        path = os.path.join(out_dir, f"{prefix}_{metric}.png")
        fig.savefig(path, dpi=130)
        plt.close(fig)
        written.append(path)

    imp_rows = [r for r in rows if r.improvement_vs_rrtstar_pct is not None
                and r.algorithm != "rrt_star"]
    if imp_rows:
        by_metric = defaultdict(list)
        for r in imp_rows:
            by_metric[r.metric].append(r)
        for metric, metric_rows in sorted(by_metric.items()):
            algs = sorted({r.algorithm for r in metric_rows})
            sets = sorted({r.map_set for r in metric_rows})
            lookup = {(r.algorithm, r.map_set): r for r in metric_rows}
            fig, ax = plt.subplots(figsize=(1.8 + 1.2 * len(sets) * len(algs) / 2, 3.6))
            width = 0.8 / len(algs)
            xs = np.arange(len(sets))
            for ai, alg in enumerate(algs):
                vals = [lookup[(alg, s)].improvement_vs_rrtstar_pct
                        if (alg, s) in lookup else np.nan for s in sets]
                ax.bar(xs + (ai - (len(algs) - 1) / 2) * width, vals, width, label=alg)
            ax.axhline(0.0, color="black", linewidth=0.8)
            ax.set_xticks(xs)
            ax.set_xticklabels(sets)
            ax.set_ylabel(f"improvement over rrt_star [%] ({metric})")
            ax.legend(fontsize=8)
            fig.tight_layout()
            path = os.path.join(out_dir, f"{prefix}_improvement_{metric}.png")
            fig.savefig(path, dpi=130)
            plt.close(fig)
            written.append(path)
    return written


def render_instance_figure(grid: GridMap, out_path, path=None, guidance=None,
                           vertices=None, title=None) -> str:
    """Debug view: map cells, optional guidance heatmap, path and vertices."""
    fig, ax = plt.subplots(figsize=(5, 5))
    palette = np.array([[int(h[i:i + 2], 16) for i in (1, 3, 5)]
                        for h in _CELL_COLORS]) / 255.0
    ax.imshow(palette[grid.cells], origin="upper",
              extent=(0, grid.width, grid.height, 0))
    if guidance is not None:
        ax.imshow(guidance.prob, origin="upper", cmap="magma", alpha=0.55,
                  extent=(0, grid.width, grid.height, 0), vmin=0.0, vmax=1.0)
    if path is not None:
        xs = [p[0] for p in path]
        ys = [p[1] for p in path]
        ax.plot(xs, ys, "-", color="#1f77b4", linewidth=1.6)
    if vertices is not None:
        ax.plot([v.x + 0.5 for v in vertices], [v.y + 0.5 for v in vertices],
                "o", color="#1f77b4", markersize=4)
    ax.plot([grid.start.x + 0.5], [grid.start.y + 0.5], "*", color="#2ca02c",
            markersize=12)
    ax.plot([grid.goal.x + 0.5], [grid.goal.y + 0.5], "X", color="#d62728",
            markersize=10)
    if title:
        ax.set_title(title)
    ax.set_xlim(0, grid.width)
    ax.set_ylim(grid.height, 0)
    fig.tight_layout()
    fig.savefig(out_path, dpi=130)
    plt.close(fig)
    return str(out_path)
