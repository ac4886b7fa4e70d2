"""Matplotlib figures written next to the CLI's machine-readable output."""

from __future__ import annotations

import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .geometry import RegularPolygon, limit_shape  # noqa: E402

STYLE = {
    "font.size": 10,
    "axes.labelsize": 10,
    "legend.fontsize": 8,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "figure.dpi": 120,
}


def _new(width=4.5, ratio=0.75):
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(width, width * ratio))
    return fig, ax


def _save(fig, path):
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
    return path


def plot_sample(poly: RegularPolygon, cfg, path: str) -> str:
    """Host polygon, sample hull, its circumscribed polygon and the limit shape."""
    fig, ax = _new(4.5, 1.0)
    v = np.vstack([poly.vertices, poly.vertices[:1]])
    ax.plot(v[:, 0], v[:, 1], color="black", lw=1)
    lim = limit_shape(poly, 256)
    lim = np.vstack([lim, lim[:1]])
    ax.plot(lim[:, 0], lim[:, 1], color="#c03030", lw=1, label="limit shape")
    b = np.vstack([cfg.ecp.b, cfg.ecp.b[:1]])
    ax.plot(b[:, 0], b[:, 1], color="0.6", lw=0.8, ls="--", label="circumscribed")
    p = np.vstack([cfg.points, cfg.points[:1]])
    ax.plot(p[:, 0], p[:, 1], color="#2060b0", lw=0.8, marker=".", ms=3, label=f"n={cfg.n}")
    ax.set_aspect("equal")
    ax.legend(loc="upper right", frameon=False)
    ax.set_axis_off()
    return _save(fig, path)


def plot_hausdorff(summary, path: str) -> str:
    n = np.array(summary.params["n_list"], dtype=float)
    med = np.array(summary.details["medians"])
    fig, ax = _new()
    ax.loglog(n, med, "o", color="#2060b0", label="median distance")
    fit = np.exp(np.polyval(np.polyfit(np.log(n), np.log(med), 1), np.log(n)))
    ax.loglog(n, fit, "-", color="#c03030", label=f"slope {summary.estimate:.3f}")
    ax.set_xlabel("n")
    ax.set_ylabel("Hausdorff distance to limit shape")
    ax.legend(frameon=False)
    return _save(fig, path)


def plot_overview(results, path: str) -> str:
    """One bar per check: standardized deviation from target where defined."""
    fig, ax = _new(6.0, 0.6)
    names, vals, colors = [], [], []
    for r in results:
        z = np.nan
        if r.target is not None and r.stderr and np.isfinite(r.stderr) and r.stderr > 0:
            z = abs(r.estimate - r.target) / r.stderr
        names.append(r.test)
        vals.append(0.0 if np.isnan(z) else z)
        colors.append("#3a9a3a" if r.passed else "#c03030")
    y = np.arange(len(names))
    ax.barh(y, vals, color=colors)
    ax.set_yticks(y)
    ax.set_yticklabels(names)
    ax.axvline(3.0, color="0.5", lw=0.8, ls=":")
    ax.set_xlabel("|estimate - target| / stderr")
    return _save(fig, path)


def write_figures(results, directory: str) -> list[str]:
    out = [plot_overview(results, os.path.join(directory, "overview.png"))]
    for r in results:
        if r.details.get("medians") is not None and "n_list" in r.params:
            out.append(plot_hausdorff(r, os.path.join(directory, f"{r.test}.png")))
    return out
