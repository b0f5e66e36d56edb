"""Static figures for the report path (Agg backend, deterministic PNG metadata)."""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402


@dataclass
class Series:
    name: str
    points: list  # (x, y) pairs
    xlabel: str = "x"
    ylabel: str = "y"
    logx: bool = False
    logy: bool = False


def write_series(series: Series, path: Path) -> Path:
    """Two whitespace-separated columns, one point per line."""
    with open(path, "w") as fh:
        fh.write(f"# {series.xlabel} {series.ylabel}\n")
        for x, y in series.points:
            fh.write(f"{x!r} {y!r}\n")
    return path


def render(series_list: list[Series], path: Path, title: str) -> Path:
    fig, axes = plt.subplots(1, len(series_list), figsize=(4.5 * len(series_list), 3.6), squeeze=False)
    for ax, s in zip(axes[0], series_list):
        xs = [p[0] for p in s.points]
        ys = [p[1] for p in s.points]
        ax.plot(xs, ys, marker="o", ms=3, lw=1)
        if s.logx:
            ax.set_xscale("log", base=2)
        if s.logy:
            ax.set_yscale("log", base=2)
        ax.set_xlabel(s.xlabel)
        ax.set_ylabel(s.ylabel)
        ax.set_title(s.name, fontsize=9)
        ax.grid(alpha=0.3)
    fig.suptitle(title, fontsize=10)
    fig.tight_layout()
    fig.savefig(path, dpi=100, metadata={"Software": None})
    plt.close(fig)
    return path
