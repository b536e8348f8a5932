"""CSV tables and figures written next to command output."""

from __future__ import annotations

import csv
import os
from typing import Dict, List

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .saturation import FAMILIES, SaturationStats  # noqa: E402


def write_saturation_report(stats: SaturationStats, outdir: str) -> List[str]:
    """stats.csv with one row per (round, family) and a plot of the
    transitions each family added per round."""
    os.makedirs(outdir, exist_ok=True)
    csv_path = os.path.join(outdir, "stats.csv")
    with open(csv_path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["round", "family", "added"])
        for r, row in enumerate(stats.per_round, 1):
            for fam in FAMILIES:
                w.writerow([r, fam, row.get(fam, 0)])
    png_path = os.path.join(outdir, "rounds.png")
    fig, ax = plt.subplots(figsize=(6, 3.5))
    rounds = list(range(1, len(stats.per_round) + 1))
    for fam in FAMILIES:
        ys = [row.get(fam, 0) for row in stats.per_round]
        if any(ys):
            ax.plot(rounds, ys, marker="o", label=fam)
    ax.set_xlabel("round")
    ax.set_ylabel("transitions added")
    ax.set_title(f"saturation, {stats.rounds} rounds")
    if ax.get_legend_handles_labels()[0]:
        ax.legend(fontsize="small")
    fig.tight_layout()
    fig.savefig(png_path, dpi=100)
    plt.close(fig)
    return [csv_path, png_path]


def write_xcheck_report(table: Dict[tuple, int], outdir: str) -> List[str]:
    """`table` maps (verdict, accepted) to a count."""
    os.makedirs(outdir, exist_ok=True)
    rows = sorted(table.items())
    csv_path = os.path.join(outdir, "xcheck.csv")
    with open(csv_path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["oracle", "saturation", "trees"])
        for (verdict, accepted), n in rows:
            w.writerow([verdict, "accepted" if accepted else "rejected", n])
    png_path = os.path.join(outdir, "xcheck.png")
    fig, ax = plt.subplots(figsize=(6, 3.5))
    labels = [f"{v}\n{'acc' if a else 'rej'}" for (v, a), _ in rows]
    ax.bar(range(len(rows)), [n for _, n in rows], color="tab:blue")
    ax.set_xticks(range(len(rows)))
    ax.set_xticklabels(labels, fontsize="small")
    ax.set_ylabel("trees")
    ax.set_title("forward search vs saturation")
    fig.tight_layout()
    fig.savefig(png_path, dpi=100)
    plt.close(fig)
    return [csv_path, png_path]
