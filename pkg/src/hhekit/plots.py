"""Figure rendering for the report and simulate subcommands (file output only)."""
from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

_UNIT_COLORS = {"DAU": "tab:blue", "RSU": "tab:orange", "UCU": "tab:green", "DTU": "tab:purple", "NIU": "tab:red"}


def _save(fig, path) -> Path:
    path = Path(path)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def plot_speedup_sweep(rows, path) -> Path:
    """Grouped bars of near-network speedup per bus config, one group per direction."""
    directions = sorted({r.direction for r in rows}, reverse=True)
    buses = list(dict.fromkeys(r.bus for r in rows))
    fig, ax = plt.subplots(figsize=(6.4, 3.6))
    width = 0.8 / max(len(directions), 1)
    for k, d in enumerate(directions):
        vals = {r.bus: r.speedup for r in rows if r.direction == d}
        xs = [i + (k - (len(directions) - 1) / 2) * width for i in range(len(buses))]
        ax.bar(xs, [vals[b] for b in buses], width, label=d.replace("_", "-"))
    ax.set_xticks(range(len(buses)), buses)
    ax.set_xlabel("bus (channels x width)")
    ax.set_ylabel("speedup over standalone")
    ax.axhline(1.0, color="0.5", lw=0.8)
    ax.legend(frameon=False)
    return _save(fig, path)


def plot_latency(reports, path) -> Path:
    """Stacked compute / transfer cycles for a set of latency reports."""
    fig, ax = plt.subplots(figsize=(6.4, 3.6))
    labels = [f"{r.bus}\n{r.direction.split('_')[0]}" for r in reports]
    comp = [r.compute_cycles / 1e3 for r in reports]
    xfer = [r.transfer_cycles / 1e3 for r in reports]
    ax.bar(labels, comp, label="compute")
    ax.bar(labels, xfer, bottom=comp, label="transfer")
    ax.set_ylabel("kcycles")
    ax.legend(frameon=False)
    return _save(fig, path)


def plot_crossover(rows, path) -> Path:
    fig, ax = plt.subplots(figsize=(6.4, 3.6))
    for bus in dict.fromkeys(r.bus for r in rows):
        sub = [r for r in rows if r.bus == bus]
        xs = [r.length for r in sub]
        ax.plot(xs, [r.end_to_end_speedup for r in sub], marker="o", label=f"end-to-end ({bus})")
    base = [r for r in rows if r.bus == rows[0].bus]
    ax.plot([r.length for r in base], [r.compute_speedup for r in base], marker="s", ls="--", color="k",
            label="compute only")
    ax.set_xscale("log", base=2)
    ax.set_yscale("log")
    ax.set_xlabel("message length (slots)")
    ax.set_ylabel("CKKS / Rubato latency")
    ax.legend(frameon=False)
    return _save(fig, path)


def plot_trace(report, path) -> Path:
    """Gantt chart of task intervals per functional unit."""
    units = ["DAU", "RSU", "UCU", "DTU", "NIU"]
    fig, ax = plt.subplots(figsize=(7.2, 2.8))
    for t in report.tasks:
        y = units.index(t.unit)
        ax.barh(y, t.finish - t.start, left=t.start, height=0.6, color=_UNIT_COLORS[t.unit], edgecolor="k", lw=0.3)
    ax.set_yticks(range(len(units)), units)
    ax.set_xlabel("cycle")
    ax.set_xlim(0, max(report.total_cycles, 1))
    ax.invert_yaxis()
    return _save(fig, path)
