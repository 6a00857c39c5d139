"""Matplotlib rendering of scenario outputs to image files.

Used only by the command-line report path; the scenario runners themselves
emit data tables and know nothing about plotting.  Backend is forced to Agg
since these figures always go to files.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .dynamics import PROTOCOL_ADIABATIC, PROTOCOL_TQD, Trajectory
from .experiments import Figure4Result, SweepResult


def plot_trajectory(traj: Trajectory, path: str | Path, title: str = "") -> Path:
    """Fractional coil energies over the drive window."""
    path = Path(path)
    fig, ax = plt.subplots(figsize=(6, 4))
    t_us = traj.t * 1e6
    ax.plot(t_us, traj.frac_s, "r-", label="source")
    ax.plot(t_us, traj.frac_d, "b-.", label="drain")
    ax.set_xlabel("time (µs)")
    ax.set_ylabel("fractional energy")
    ax.set_ylim(-0.02, 1.02)
    if title:
        ax.set_title(title)
    ax.legend(loc="best")
    ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def plot_figure4(result: Figure4Result, path: str | Path) -> Path:
    """Efficiency versus frequency offset, one curve pair per coupling/loss ratio."""
    path = Path(path)
    fig, ax = plt.subplots(figsize=(6, 4))
    colors = ["tab:red", "tab:purple", "tab:green", "tab:blue", "tab:orange"]
    for i, ratio in enumerate(result.ratios):
        c = colors[i % len(colors)]
        ax.plot(result.deltas, result.eta[PROTOCOL_ADIABATIC][i], "-.", color=c,
                label=f"adiabatic, κ₀/Γ={ratio:g}")
        ax.plot(result.deltas, result.eta[PROTOCOL_TQD][i], "-", color=c,
                label=f"TQD, κ₀/Γ={ratio:g}")
    ax.set_xlabel("frequency offset δ (rad/s)")
    ax.set_ylabel("efficiency η")
    ax.set_title(f"window {result.window}")
    ax.legend(fontsize=8)
    ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def plot_figure5(rows: list[dict], path: str | Path) -> Path:
    """Couplings and efficiencies versus coil separation."""
    path = Path(path)
    d = [r["d"] for r in rows]
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(10, 4))
    ax1.semilogy(d, [r["kappa"] for r in rows], "b-.", label="κ(d)")
    ax1.semilogy(d, [r["kappa_a_peak"] for r in rows], ":", color="tab:brown", label="κₐ(d) peak")
    ax1.semilogy(d, [r["kappa_eff_peak"] for r in rows], "r-", label="κ_eff(d) peak")
    ax1.set_xlabel("distance d (m)")
    ax1.set_ylabel("coupling (rad/s)")
    ax1.legend()
    ax1.grid(alpha=0.3)
    ax2.plot(d, [r["eta_adiabatic"] for r in rows], "b-.", label="adiabatic")
    ax2.plot(d, [r["eta_tqd"] for r in rows], "-", color="tab:brown", label="TQD")
    ax2.set_xlabel("distance d (m)")
    ax2.set_ylabel("efficiency η")
    ax2.legend()
    ax2.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def plot_sweep(result: SweepResult, path: str | Path, title: str = "") -> Path:
    """Contours (2 axes) or curves (1 axis) of each computed sweep output."""
    path = Path(path)
    keys = [k for k in ("eta_adiabatic", "eta_tqd", "fidelity_adiabatic", "fidelity_tqd")
            if k in result.values]
    if len(result.axes) == 2:
        fig, axes = plt.subplots(1, len(keys), figsize=(4.2 * len(keys), 3.6), squeeze=False)
        x, y = result.coords[1], result.coords[0]
        for ax, key in zip(axes[0], keys):
            vals = np.ma.masked_invalid(result.values[key])
            mesh = ax.pcolormesh(x, y, vals, shading="auto", cmap="viridis",
                                 vmin=0.0, vmax=max(1e-9, float(vals.max())))
            fig.colorbar(mesh, ax=ax)
            ax.set_xlabel(result.axes[1].name)
            ax.set_ylabel(result.axes[0].name)
            ax.set_title(key, fontsize=9)
    else:
        fig, ax = plt.subplots(figsize=(6, 4))
        for key in keys:
            ax.plot(result.coords[0], result.values[key], label=key)
        ax.set_xlabel(result.axes[0].name)
        ax.legend()
        ax.grid(alpha=0.3)
        axes = None
    if title:
        fig.suptitle(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path
