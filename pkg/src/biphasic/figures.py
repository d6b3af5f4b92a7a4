"""Report figures rendered to files next to the delimited outputs."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

plt.rcParams.update(
    {
        "figure.figsize": (6.4, 4.4),
        "axes.grid": True,
        "grid.alpha": 0.4,
        "font.size": 10,
    }
)


def render_profile_figure(path, profiles, title="") -> None:
    """Pressure-vs-depth curves, one per stored step."""
    fig, ax = plt.subplots()
    cmap = plt.get_cmap("viridis")
    n = max(len(profiles), 1)
    for i, prof in enumerate(profiles):
        ax.plot(
            prof.z,
            prof.p,
            marker="o",
            markersize=3,
            color=cmap(i / max(n - 1, 1)),
            label=f"t = {prof.time:g} s",
        )
    ax.set_xlabel("z [mm]")
    ax.set_ylabel("pressure [MPa]")
    if title:
        ax.set_title(title)
    if n <= 12:
        ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)


def render_sweep_figure(path, rows, axis_name: str) -> None:
    """Oscillation metric and peak pressure against the sweep axis.

    rows: dicts with axis_value, gls ('on'/'off'), max_deviation_pct,
    peak_pressure_mpa, status.
    """
    ok = [r for r in rows if r.get("status", "ok") == "ok"]
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9.6, 4.2))
    for gls, style in (("off", "o-"), ("on", "s--")):
        sel = [r for r in ok if r["gls"] == gls]
        if not sel:
            continue
        xs = [r["axis_value"] for r in sel]
        dev = [max(r["overshoot_pct"], r["undershoot_pct"]) for r in sel]
        ax1.plot(xs, dev, style, label=f"gls {gls}")
        ax2.plot(xs, [r["peak_pressure_mpa"] for r in sel], style, label=f"gls {gls}")
    numeric = all(isinstance(r["axis_value"], (int, float)) for r in ok) and ok
    if numeric:
        vals = [r["axis_value"] for r in ok]
        if min(vals) > 0 and max(vals) / min(vals) > 20:
            ax1.set_xscale("log")
            ax2.set_xscale("log")
    for ax, ylab in ((ax1, "max deviation [%]"), (ax2, "peak pressure [MPa]")):
        ax.set_xlabel(axis_name)
        ax.set_ylabel(ylab)
        ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)
