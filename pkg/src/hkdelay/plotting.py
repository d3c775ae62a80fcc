"""Figure rendering for trajectories, verification runs, and sweeps.

SVG output is deterministic: a fixed hash salt and no embedded date, so the
same input always produces byte-identical files.
"""
from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .analysis import DecayCertificate, _diameter_series, leader_read_delay
from .integrator import Trajectory
from .model import SingleLeaderControlled
from .trajectory_io import TrajectoryData

plt.rcParams["svg.hashsalt"] = "hkdelay"

_FOLLOWER_COLOR = "tab:blue"
_LEADER_COLOR = "black"


def _save(fig, out_path: str | Path) -> None:
    out_path = Path(out_path)
    metadata = {"Date": None} if out_path.suffix.lower() == ".svg" else None
    fig.savefig(out_path, metadata=metadata)
    plt.close(fig)


def plot_trajectory(data: TrajectoryData, out_path: str | Path) -> None:
    """One line per entity over time, one panel per opinion coordinate."""
    d = data.dim
    fig, axes = plt.subplots(d, 1, sharex=True, figsize=(8.0, 2.6 * d + 0.8), squeeze=False)
    followers = [e for e, k in enumerate(data.kinds) if k == "follower"]
    leaders = [e for e, k in enumerate(data.kinds) if k == "leader"]
    for c in range(d):
        ax = axes[c, 0]
        for e in followers:
            ax.plot(data.times, data.states[:, e, c], color=_FOLLOWER_COLOR, lw=0.8, alpha=0.8)
        for e in leaders:
            ax.plot(data.times, data.states[:, e, c], color=_LEADER_COLOR, lw=1.8, ls="--")
        ax.set_ylabel(f"opinion[{c}]" if d > 1 else "opinion")
        ax.axvline(0.0, color="0.7", lw=0.6)
    axes[-1, 0].set_xlabel("t")
    handles = [plt.Line2D([], [], color=_FOLLOWER_COLOR, lw=0.8, label="follower")]
    if leaders:
        handles.append(plt.Line2D([], [], color=_LEADER_COLOR, lw=1.8, ls="--", label="leader"))
    axes[0, 0].legend(handles=handles, loc="best", fontsize=8)
    fig.tight_layout()
    _save(fig, out_path)


def plot_diameter_envelope(traj: Trajectory, cert: DecayCertificate, out_path: str | Path) -> None:
    """Measured diameter against the certified exponential envelope."""
    times = traj.times
    d = _diameter_series(traj)
    fig, ax = plt.subplots(figsize=(8.0, 4.0))
    ax.semilogy(times, np.maximum(d, 1e-300), color=_FOLLOWER_COLOR, lw=1.2, label="diameter")
    if np.isfinite(cert.decay_rate):
        origin = 0.0
        spread = cert.initial_spread
        if isinstance(traj.scenario.variant, SingleLeaderControlled) and traj.arrival_time is not None:
            origin = traj.arrival_time + leader_read_delay(traj.scenario)
        sel = times >= origin
        env = spread * np.exp(-cert.decay_rate * (times[sel] - origin - 2.0 * cert.delay))
        ax.semilogy(times[sel], env, color="tab:red", lw=1.2, ls=":", label="certified envelope")
    ax.set_xlabel("t")
    ax.set_ylabel("diameter")
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    _save(fig, out_path)


def plot_sweep(values, certified, empirical, param: str, out_path: str | Path) -> None:
    """Certified versus measured decay rates across a swept parameter."""
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.plot(values, certified, "o-", color="tab:red", label="certified rate")
    ax.plot(values, empirical, "s-", color=_FOLLOWER_COLOR, label="measured rate")
    ax.set_xlabel(param)
    ax.set_ylabel("decay rate")
    ax.set_yscale("log")
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    _save(fig, out_path)
