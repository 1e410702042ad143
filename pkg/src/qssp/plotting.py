"""Figure rendering for report outputs.

Every CLI path that writes delimited data can render a companion figure next
to it: sweep curves, sampled belief scatters, discrimination-study curves,
and dimension-fit scaling plots.  Uses the non-interactive backend so the
renderers work headless.
"""

from __future__ import annotations

import math

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

from .metrics import DimensionFit
from .sweep import SweepResult


def plot_sweep(result: SweepResult, path) -> None:
    """Entropy rate and structure metric against the swept angle."""
    rows = result.rows
    thetas = [r.theta for r in rows]
    fig, (ax1, ax2) = plt.subplots(2, 1, figsize=(7, 6), sharex=True)
    ax1.errorbar(thetas, [r.hmu for r in rows],
                 yerr=[r.hmu_stderr for r in rows],
                 fmt=".-", lw=0.8, ms=3, label="measured")
    ax1.axhline(result.generator_hmu, color="k", lw=1,
                label="generator baseline")
    ax1.set_ylabel("entropy rate (bits/symbol)")
    ax1.legend(loc="best", fontsize=8)
    for metric, color in (("cmu", "tab:blue"), ("dmu", "tab:red")):
        sel = [r for r in rows if r.structure_metric == metric
               and not math.isnan(r.structure_value)]
        if sel:
            ax2.plot([r.theta for r in sel], [r.structure_value for r in sel],
                     ".", ms=3, color=color, label=metric)
    ax2.set_xlabel("theta (rad)")
    ax2.set_ylabel("structure")
    ax2.legend(loc="best", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_points(points, path, title: str = "") -> None:
    """Scatter of sampled beliefs (first two coordinates), or a histogram
    when the simplex is one-dimensional."""
    import numpy as np

    pts = np.asarray(points)
    fig, ax = plt.subplots(figsize=(6, 6))
    if pts.shape[1] >= 3:
        ax.plot(pts[:, 0], pts[:, 1], ",", alpha=0.25)
        ax.set_xlabel("belief component 1")
        ax.set_ylabel("belief component 2")
    else:
        ax.hist(pts[:, 0], bins=400)
        ax.set_xlabel("belief component 1")
        ax.set_ylabel("count")
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_usd_study(rows, path) -> None:
    """Metrics against the separation angle plus the complexity-entropy curve."""
    alphas = [r.alpha for r in rows]
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 4))
    ax1.plot(alphas, [r.hmu for r in rows], ".-", ms=3, label="entropy rate")
    ax1.plot(alphas, [r.cmu for r in rows], ".-", ms=3, label="complexity")
    ax1.set_xlabel("alpha (rad)")
    ax1.set_ylabel("bits")
    ax1.legend(fontsize=8)
    ax2.plot([r.hmu for r in rows], [r.cmu for r in rows], ".-", ms=3)
    ax2.set_xlabel("entropy rate (bits/symbol)")
    ax2.set_ylabel("complexity (bits)")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_dimension_fit(fit: DimensionFit, path) -> None:
    """Coarse-grained entropy against log2(1/epsilon) with the fitted window."""
    import numpy as np

    x = np.log2(1.0 / np.asarray(fit.eps_values))
    y = np.asarray(fit.h_values)
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(x, y, "o", ms=4, label="coarse-grained entropy")
    lo, hi = fit.eps_window
    sel = (np.asarray(fit.eps_values) <= lo + 1e-15) & \
          (np.asarray(fit.eps_values) >= hi - 1e-15)
    if sel.sum() >= 2:
        xs = x[sel]
        ys = y[sel]
        coef = np.polyfit(xs, ys, 1)
        ax.plot(xs, np.polyval(coef, xs), "-",
                label=f"slope {fit.slope:.3f} (R2 {fit.r_squared:.4f})")
    ax.set_xlabel("log2(1/epsilon)")
    ax.set_ylabel("entropy (bits)")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
