"""Matplotlib renderings of sweep results, written as SVG files."""
from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

# Stable element ids so repeated runs give byte-identical SVG.
plt.rcParams["svg.hashsalt"] = "neutron-entangle"

VARIANT_STYLE = {
    "A": {"color": "green", "linestyle": "--", "label": "initial state A"},
    "B": {"color": "blue", "linestyle": "-", "label": "initial state B"},
}

AXIS_LABELS = {"tau": r"interaction time $\tau$", "B_z": r"field $B_z$", "N": r"sample size $N$"}


def _save(fig, path):
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def plot_time_traces(results, path, title=None):
    """Concurrence against tau, one curve per initial-state variant."""
    fig, ax = plt.subplots(figsize=(5.5, 4))
    for res in results:
        variant = res.metadata["variant"]
        style = VARIANT_STYLE.get(variant, {"label": variant})
        ax.plot(res.values, res.concurrences, **style)
    ax.set_xlabel(AXIS_LABELS["tau"])
    ax.set_ylabel("concurrence")
    ax.set_ylim(0, 1)
    if title:
        ax.set_title(title)
    ax.legend(frameon=False)
    _save(fig, path)


def plot_peak_family(results, path, title=None):
    """Peak concurrence against the swept variable, one curve per N."""
    fig, ax = plt.subplots(figsize=(7, 4))
    for res in results:
        ax.plot(res.values, res.concurrences, label=f"N = {res.metadata['N']}")
    ax.set_xlabel(AXIS_LABELS[results[0].spec.variable])
    ax.set_ylabel(r"peak concurrence $C_p$")
    ax.set_ylim(0, 1)
    if title:
        ax.set_title(title)
    ax.legend(frameon=False)
    _save(fig, path)


def plot_sweeps(results, path):
    if results[0].spec.quantity == "peak":
        plot_peak_family(results, path)
    else:
        plot_time_traces(results, path)
