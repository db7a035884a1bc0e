"""Figures written next to the CSV/JSON outputs of ``binfair report`` and ``binfair solve --plot``."""

from __future__ import annotations

import math
from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .audit import CorpusRow  # noqa: E402
from .generators import ProbeReport  # noqa: E402
from .nsw_alg import SolveTrace  # noqa: E402

_STYLE = {
    "figure.figsize": (6.0, 3.8),
    "axes.spines.top": False,
    "axes.spines.right": False,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "font.size": 9,
    # fixed metadata keeps PNG bytes reproducible
    "savefig.dpi": 120,
}


def _save(fig, path: str | Path) -> Path:
    path = Path(path)
    fig.tight_layout()
    fig.savefig(path, metadata={"Software": None})
    plt.close(fig)
    return path


def plot_trajectory(trace: SolveTrace, path: str | Path) -> Path:
    """Nash welfare after each loop iteration against the guaranteed growth curve."""
    n, m = trace.num_agents, trace.num_goods
    nsw = [1.0] + [r.nsw_after for r in trace.iterations]
    steps = range(len(nsw))
    floor = [(1 + 1 / (4 * m + 1)) ** (t / n) for t in steps]
    with plt.rc_context(_STYLE):
        fig, ax = plt.subplots()
        ax.plot(steps, nsw, marker="o", ms=3, label="ALG")
        ax.plot(steps, floor, ls="--", color="gray", label="guaranteed growth")
        ax.set_xlabel("iteration")
        ax.set_ylabel("Nash social welfare")
        ax.legend(frameon=False)
        return _save(fig, path)


def plot_corpus(rows: Sequence[CorpusRow], path: str | Path) -> Path:
    """Empirical NSW and SW ratios per corpus instance with the proven floors."""
    with plt.rc_context(_STYLE):
        fig, (ax1, ax2) = plt.subplots(1, 2, sharey=True)
        xs = range(len(rows))
        ax1.scatter(xs, [r.nsw_ratio for r in rows], s=6)
        ax1.axhline(1 / 288, color="crimson", lw=1, label="1/288")
        ax1.set_title("NSW(ALG) / NSW(OPT)")
        ax2.scatter(xs, [r.sw_ratio for r in rows], s=6, color="tab:green")
        ax2.axhline(1 / (3 + 2 * math.sqrt(2)), color="crimson", lw=1, label="1/(3+2√2)")
        ax2.set_title("SW(ALG) / SW(OPT)")
        for ax in (ax1, ax2):
            ax.set_xlabel("instance")
            ax.set_ylim(0, 1.05)
            ax.legend(frameon=False, loc="lower right")
        return _save(fig, path)


def plot_probe(report: ProbeReport, path: str | Path) -> Path:
    sizes = [r["cardinality"] for r in report.rows]
    frac = [r["mismatches"] / r["queries"] for r in report.rows]
    with plt.rc_context(_STYLE):
        fig, ax = plt.subplots()
        ax.bar(sizes, frac, width=0.8)
        ax.axvline(report.p + 0.5, color="gray", ls=":", lw=1)
        ax.axvline(report.q + 0.5, color="gray", ls=":", lw=1)
        ax.set_xlabel("|S|")
        ax.set_ylabel("fraction with f'(S) != f(S)")
        ax.set_title(f"n={report.n}, p={report.p}, q={report.q}")
        return _save(fig, path)
