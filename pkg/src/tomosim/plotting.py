"""Figures for shot-scaling scans, rendered headless to PNG files."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .tomography import ScalingScan  # noqa: E402


def plot_scaling_scan(scan: ScalingScan, path, title: str = "") -> None:
    """Log-log plot of estimator spread versus shots, with the fitted line and a 1/sqrt(M) guide."""
    shots = np.array([r[0] for r in scan.rows], dtype=float)
    stds = np.array([r[1] for r in scan.rows], dtype=float)
    fig, ax = plt.subplots(figsize=(5.0, 3.6), dpi=100)
    ax.set_xscale("log")
    ax.set_yscale("log")
    pos = stds > 0
    if np.any(pos):
        ax.plot(shots[pos], stds[pos], "o", color="C0", label=f"empirical std ({scan.repetitions} reps)")
    else:
        # deterministic outcomes leave nothing to draw on log axes
        ax.text(0.5, 0.5, "zero spread at every M", ha="center", va="center", transform=ax.transAxes)
    if scan.slope is not None:
        fit = 10 ** (scan.intercept + scan.slope * np.log10(shots))
        ax.plot(shots, fit, "-", color="C0", lw=1, label=f"fit, slope {scan.slope:.3f}")
        guide = stds[0] * np.sqrt(shots[0] / shots)
        ax.plot(shots, guide, "--", color="0.5", lw=1, label="slope -1/2")
    ax.set_xlabel("shots per setting M")
    ax.set_ylabel("std of estimate")
    if title:
        ax.set_title(title, fontsize=10)
    if np.any(pos):
        ax.legend(fontsize=8, frameon=False)
    ax.spines["right"].set_visible(False)
    ax.spines["top"].set_visible(False)
    fig.tight_layout()
    # no Software/date metadata so repeated runs give identical bytes
    fig.savefig(path, format="png", metadata={"Software": None})
    plt.close(fig)
