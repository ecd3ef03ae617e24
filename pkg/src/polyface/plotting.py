"""Static figures for phase diagrams and threshold curves.

Output is byte-reproducible: the SVG backend gets a fixed hash salt and no
date stamp.
"""
from __future__ import annotations

import numpy as np

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
from matplotlib.patches import Rectangle  # noqa: E402

from .probcalc import rho_strong, rho_weak  # noqa: E402

_RC = {
    "svg.hashsalt": "polyface",
    "svg.fonttype": "none",
    "font.size": 9,
    "axes.linewidth": 0.8,
    "figure.dpi": 100,
}
_METADATA = {"svg": {"Date": None}, "png": {"Software": None}, "pdf": {"CreationDate": None}}


def _save(fig, path):
    fmt = str(path).rsplit(".", 1)[-1].lower()
    fig.savefig(path, format=fmt, metadata=_METADATA.get(fmt))
    plt.close(fig)


def weak_curve(num: int = 201):
    deltas = np.linspace(1e-3, 1 - 1e-3, num)
    return deltas, np.array([rho_weak(d) for d in deltas])


def emit_svg_heatmap(table, path, title: str | None = None) -> None:
    """Render a phase-diagram table as an SVG heatmap with the weak threshold overlaid.

    ``table`` is the row list from ``phase_diagram`` / ``read_phase_csv``.
    Each lattice cell is a rectangle (``id="cell-i-j"``) colored by the
    empirical ratio; cells without a Monte Carlo estimate use the exact
    prediction and are hatched. The curve has ``id="rho-weak-curve"``.
    """
    rows = list(table)
    if not rows:
        raise ValueError("empty phase table; nothing to draw")
    deltas = sorted({r["delta"] for r in rows})
    rhos = sorted({r["rho"] for r in rows})
    if len(deltas) * len(rhos) != len(rows):
        raise ValueError("phase table is not a full lattice")
    wd = 1.0 / len(deltas)
    wr = 1.0 / len(rhos)
    cmap = plt.get_cmap("viridis")

    with plt.rc_context(_RC):
        fig, ax = plt.subplots(figsize=(5.0, 4.2))
        for r in rows:
            i, j = deltas.index(r["delta"]), rhos.index(r["rho"])
            value = r["empirical"] if r["empirical"] is not None else r["predicted"]
            rect = Rectangle((r["delta"] - wd / 2, r["rho"] - wr / 2), wd, wr,
                             facecolor=cmap(float(value)), edgecolor="white", linewidth=0.3,
                             hatch="//" if r["empirical"] is None else None)
            rect.set_gid(f"cell-{i}-{j}")
            ax.add_patch(rect)
        d, rw = weak_curve()
        (line,) = ax.plot(d, rw, color="black", lw=1.4, label=r"$\rho_W(\delta)=\max(0,2-1/\delta)$")
        line.set_gid("rho-weak-curve")
        ax.set_xlim(0, 1)
        ax.set_ylim(0, 1)
        ax.set_xlabel(r"$\delta = n/N$")
        ax.set_ylabel(r"$\rho = k/n$")
        if title:
            ax.set_title(title)
        ax.legend(loc="upper left", frameon=False)
        sm = plt.cm.ScalarMappable(cmap=cmap, norm=plt.Normalize(0, 1))
        fig.colorbar(sm, ax=ax, label="face survival ratio")
        fig.tight_layout()
        _save(fig, path)


def plot_thresholds(path, steps: int = 200) -> None:
    """Weak (orthant = hypercube) and strong orthant thresholds against delta."""
    with plt.rc_context(_RC):
        fig, ax = plt.subplots(figsize=(5.0, 3.6))
        d, rw = weak_curve(steps)
        ax.plot(d, rw, color="black", lw=1.4, label=r"weak $\rho_W$")
        ds = np.linspace(0.5, 1.0, steps)
        ax.plot(ds, [rho_strong(x) for x in ds], color="tab:blue", lw=1.4, label=r"strong $\rho_S$")
        ax.set_xlim(0, 1)
        ax.set_ylim(0, 1)
        ax.set_xlabel(r"$\delta = n/N$")
        ax.set_ylabel(r"$\rho = k/n$")
        ax.legend(loc="upper left", frameon=False)
        fig.tight_layout()
        _save(fig, path)
