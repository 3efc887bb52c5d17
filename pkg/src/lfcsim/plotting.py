"""Matplotlib rendering of simulation results to vector files.

Output is SVG with a fixed hash salt and no timestamp, so the same
result always renders to the same bytes.
"""
import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

from .errors import UnknownSignalError  # noqa: E402

STYLE = {
    "font.size": 10,
    "axes.labelsize": 10,
    "legend.fontsize": 8,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "axes.grid": True,
    "grid.linewidth": 0.4,
    "lines.linewidth": 1.2,
    "svg.hashsalt": "lfcsim",
    "svg.fonttype": "none",
    "figure.figsize": (6.4, 3.6),
}


def ylabel_for(signals):
    if all(s.startswith("df_") for s in signals):
        return "frequency deviation [pu]"
    return "deviation [pu]"


def plot_signals(ax, result, signals):
    for name in signals:
        ax.plot(result.time, result.series[name], label=name)
    ax.set_xlabel("time [s]")
    ax.set_ylabel(ylabel_for(signals))
    ax.set_xlim(result.time[0], result.time[-1])
    ax.axhline(0.0, color="0.6", linewidth=0.6)
    ax.legend(loc="best")


def emit_plot(result, signals, path):
    """Render ``signals`` of ``result`` as one chart at ``path`` (SVG)."""
    signals = list(signals)
    if not signals:
        raise UnknownSignalError("no signals requested for plot")
    missing = [s for s in signals if s not in result.series]
    if missing:
        raise UnknownSignalError(f"unknown signal(s) {missing}; available: {list(result.series)}")
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        try:
            plot_signals(ax, result, signals)
            fig.tight_layout()
            fig.savefig(path, format="svg", metadata={"Date": None})
        finally:
            plt.close(fig)
    return path
