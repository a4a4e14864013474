"""Figure rendering for simulation traces, design maps and robustness checks.

All functions write a figure file (format follows the extension; the CLI
uses .svg) and return the path.  Steering is plotted in degrees; it is
stored in radians everywhere else.
"""

import math

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

__all__ = [
    "save_trace_figure",
    "save_table_figure",
    "save_design_figure",
    "save_margin_figure",
    "save_vertex_response_figure",
]

RAD_TO_DEG = 180.0 / math.pi


def save_trace_figure(trace, path):
    fig, (ax_y, ax_u) = plt.subplots(2, 1, figsize=(8, 6), sharex=True)
    ax_y.plot(trace.t, trace.y, label="lateral deviation")
    if np.any(trace.r != 0.0):
        ax_y.plot(trace.t, trace.r, "k--", linewidth=1, label="reference")
    ax_y.set_ylabel("y [m]")
    ax_y.grid(True, alpha=0.3)
    ax_y.legend(loc="best")
    ax_u.plot(trace.t, trace.delta_f * RAD_TO_DEG, color="tab:orange")
    ax_u.set_ylabel("steering [deg]")
    ax_u.set_xlabel("time [s]")
    ax_u.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
    return path


def save_table_figure(table, path):
    fig, ax = plt.subplots(figsize=(8, 4.5))
    x = np.arange(len(table.labels))
    width = 0.38
    ax.bar(x - width / 2, table.rms_y[0], width, label=table.architectures[0])
    ax.bar(x + width / 2, table.rms_y[1], width, label=table.architectures[1])
    ax.set_xticks(x)
    ax.set_xticklabels(table.labels, rotation=15, fontsize=8)
    ax.set_ylabel("RMS tracking error [m]")
    ax.grid(True, axis="y", alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
    return path


def save_design_figure(grid, path, selected=None):
    fig, ax = plt.subplots(figsize=(6.5, 5.5))
    ax.contourf(
        grid.kd_values,
        grid.kp_values,
        grid.feasible.astype(float),
        levels=[0.5, 1.5],
        colors=["tab:green"],
        alpha=0.4,
    )
    ax.contour(
        grid.kd_values,
        grid.kp_values,
        grid.feasible.astype(float),
        levels=[0.5],
        colors=["tab:green"],
    )
    if selected is not None:
        ax.plot(selected[1], selected[0], "r*", markersize=12, label="selected gains")
        ax.legend(loc="lower right")
    ax.set_xlabel("derivative gain")
    ax.set_ylabel("proportional gain")
    ax.set_title("pole-region feasible set")
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
    return path


def save_margin_figure(report, path, test_label="test value", title=""):
    fig, ax = plt.subplots(figsize=(7, 5))
    ax.loglog(report.omega, report.test_values, label=test_label)
    finite = np.isfinite(report.bounds)
    ax.loglog(
        report.omega[finite], report.bounds[finite], "r--", label="stability bound"
    )
    if np.isfinite(report.critical_omega):
        ax.axvline(report.critical_omega, color="gray", linewidth=0.8, alpha=0.6)
    ax.set_xlabel("frequency [rad/s]")
    ax.set_ylabel("magnitude")
    verdict = "PASS" if report.passed else "FAIL"
    margin = (
        f"{report.margin_db:.2f} dB" if np.isfinite(report.margin_db) else "inf"
    )
    ax.set_title(title or f"small-gain check: {verdict} (margin {margin})")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
    return path


def save_vertex_response_figure(omega, responses, path, title=""):
    """Overlay |y/r| magnitude curves; `responses` maps label -> complex array."""
    fig, ax = plt.subplots(figsize=(7, 5))
    for label, values in responses.items():
        ax.loglog(omega, np.abs(values), label=label)
    ax.set_xlabel("frequency [rad/s]")
    ax.set_ylabel("|y/r|")
    if title:
        ax.set_title(title)
    ax.grid(True, which="both", alpha=0.3)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
    return path
