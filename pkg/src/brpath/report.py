"""Figure rendering for the experiment reports.

Each plot function takes the rows produced by the corresponding experiment
and writes a figure next to the delimited output; the CSV stays the data
boundary, figures are a convenience view.
"""

from __future__ import annotations

import math

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


def plot_remainder(rows, out_path, slopes=None):
    """Log-log defect against the control, one series per expansion degree."""
    fig, ax = plt.subplots(figsize=(6.0, 4.5))
    degrees = sorted({row.N for row in rows})
    for N in degrees:
        series = [row for row in rows if row.N == N]
        omegas = np.array([row.omega for row in series])
        defects = np.array([row.remainder for row in series])
        label = f"N={N}"
        if slopes and N in slopes:
            label += f" (slope {slopes[N]:.2f})"
        ax.loglog(omegas, defects, "o-", markersize=4, label=label)
    ax.set_xlabel(r"control $\omega(s,t)$")
    ax.set_ylabel("remainder")
    ax.set_title("Truncated-expansion defect vs. interval control")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)


def plot_optimality(rows, out_path):
    """Remainder-to-leading-term ratios with the alternating-series bracket."""
    fig, ax = plt.subplots(figsize=(6.0, 4.5))
    ns = [row.N for row in rows]
    ratios = [row.ratio for row in rows]
    lowers = [row.lower_bracket for row in rows]
    ax.plot(ns, ratios, "o-", label="measured ratio")
    ax.plot(ns, lowers, "s--", label="series lower bound")
    ax.axhline(1.0, color="gray", linewidth=0.8, label="upper bound 1")
    ax.set_xlabel("expansion degree N")
    ax.set_ylabel(r"remainder / $(t^{N+1}/(N+1))$")
    ax.set_title("Sharpness of the remainder order (exponential field)")
    ax.grid(True, alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)


def plot_decay(report, out_path):
    """Word-functional magnitudes against the factorial-decay envelope."""
    fig, ax = plt.subplots(figsize=(6.0, 4.5))
    degrees = sorted({row.degree for row in report.rows})
    for degree in degrees:
        series = [row for row in report.rows if row.degree == degree]
        omegas = np.array([row.omega for row in series])
        values = np.array([abs(row.value) for row in series])
        keep = values > 0
        if keep.any():
            ax.loglog(omegas[keep], values[keep], "o", markersize=4, label=f"|word|={degree}")
    omega_grid = np.array(sorted({row.omega for row in report.rows if row.omega > 0}))
    if omega_grid.size:
        for degree in degrees:
            c = report.fitted_constant
            env = (c * omega_grid) ** degree / (report.beta * math.factorial(degree))
            ax.loglog(omega_grid, env, "--", linewidth=0.8, alpha=0.6)
    ax.set_xlabel(r"1-variation $\omega(s,t)$")
    ax.set_ylabel("|word functional|")
    ax.set_title(f"Factorial decay (fitted constant {report.fitted_constant:.3g})")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)
