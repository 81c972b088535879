"""Figures for benchmark reports (needs the ``plot`` extra).

matplotlib is imported lazily and switched to the Agg backend, so importing
this module never requires a display and the core package never needs
matplotlib at all.
"""

from __future__ import annotations

from collections import defaultdict
from pathlib import Path
from typing import Mapping, Sequence

from .core import SapInstance
from .portfolio import RatioRow


def _pyplot():
    try:
        import matplotlib
    except ImportError as exc:  # pragma: no cover - depends on the environment
        raise RuntimeError("figures need matplotlib: pip install 'artifact[plot]'") from exc
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    plt.rcParams.update({"font.size": 9, "axes.spines.top": False,
                         "axes.spines.right": False, "savefig.dpi": 120})
    return plt


def ratio_figure(rows: Sequence[RatioRow], path: str | Path) -> Path:
    """Box plot of opt/profit per algorithm (rows without a ratio are skipped)."""
    plt = _pyplot()
    by_algo: dict[str, list[float]] = defaultdict(list)
    for row in rows:
        if row.ratio is not None:
            by_algo[row.algo].append(float(row.ratio))
    algos = sorted(by_algo)
    fig, ax = plt.subplots(figsize=(6, 3.2))
    if algos:
        ax.boxplot([by_algo[a] for a in algos], showmeans=True)
        ax.set_xticks(range(1, len(algos) + 1), algos)
    ax.axhline(1.0, color="0.6", lw=0.8, ls="--")
    ax.set_ylabel("opt / profit")
    ax.set_title("empirical ratios")
    fig.tight_layout()
    out = Path(path)
    fig.savefig(out)
    plt.close(fig)
    return out


def placement_figure(instance: SapInstance, placement: Mapping[str, int],
                     path: str | Path, title: str = "") -> Path:
    """Tasks as rectangles over the capacity profile."""
    plt = _pyplot()
    from matplotlib.patches import Rectangle

    fig, ax = plt.subplots(figsize=(max(4, instance.m * 0.8), 3.2))
    xs, ys = [], []
    for e, u in enumerate(instance.capacities):
        xs += [e, e + 1]
        ys += [u, u]
    ax.plot(xs, ys, color="black", lw=1.2)
    cmap = plt.get_cmap("tab20")
    for k, tid in enumerate(sorted(placement)):
        task = instance.task(tid)
        h = placement[tid]
        ax.add_patch(Rectangle((task.s, h), task.t - task.s, task.d, facecolor=cmap(k % 20),
                               edgecolor="black", lw=0.6, alpha=0.85))
        ax.text((task.s + task.t) / 2, h + task.d / 2, tid, ha="center", va="center", fontsize=7)
    ax.set_xlim(0, instance.m)
    ax.set_ylim(0, instance.max_capacity + 1)
    ax.set_xlabel("edge")
    ax.set_ylabel("height")
    if title:
        ax.set_title(title)
    fig.tight_layout()
    out = Path(path)
    fig.savefig(out)
    plt.close(fig)
    return out


def write_figures(rows: Sequence[RatioRow], instances: Mapping[str, SapInstance],
                  directory: str | Path) -> list[Path]:
    """Ratio plot plus one placement drawing per instance (portfolio result)."""
    out_dir = Path(directory)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = [ratio_figure(rows, out_dir / "ratios.png")]
    for row in rows:
        if row.algo == "portfolio" and row.instance_id in instances:
            written.append(placement_figure(instances[row.instance_id], row.placement,
                                            out_dir / f"placement_{row.instance_id}.png",
                                            f"{row.instance_id}: profit {row.profit}"))
    return written


__all__ = ["placement_figure", "ratio_figure", "write_figures"]
