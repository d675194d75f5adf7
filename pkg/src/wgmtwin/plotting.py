"""Figure rendering for far-field maps, efficiency curves, sweeps, profiles."""

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .dipole import FarFieldMap
from .workflow import SweepResult


def _save(fig, path) -> str:
    fig.tight_layout()
    fig.savefig(path, dpi=160)
    plt.close(fig)
    return str(path)


def plot_farfield(fmap: FarFieldMap, path, na_mark: float = 0.7) -> str:
    """Intensity on the NA disk (x = sin(theta) cos(phi)) with an NA circle."""
    # Close the phi seam so pcolormesh covers the full disk.
    phi = np.append(fmap.phi, fmap.phi[0] + 2.0 * np.pi)
    inten = np.column_stack([fmap.intensity, fmap.intensity[:, 0]])
    tt, pp = np.meshgrid(fmap.theta, phi, indexing="ij")
    x = np.sin(tt) * np.cos(pp)
    y = np.sin(tt) * np.sin(pp)
    fig, ax = plt.subplots(figsize=(5.0, 4.2))
    mesh = ax.pcolormesh(x, y, inten, shading="gouraud", cmap="inferno",
                         vmin=0.0, vmax=1.0)
    ring = np.linspace(0.0, 2.0 * np.pi, 361)
    ax.plot(na_mark * np.cos(ring), na_mark * np.sin(ring), "w--", lw=1.0,
            label=f"NA = {na_mark:g}")
    ax.set_xlabel(r"$\sin\theta\,\cos\phi$")
    ax.set_ylabel(r"$\sin\theta\,\sin\phi$")
    ax.set_aspect("equal")
    ax.legend(loc="upper right", fontsize=8)
    fig.colorbar(mesh, ax=ax, label="normalized intensity")
    return _save(fig, path)


def plot_curve(curve: np.ndarray, path, na_mark: float = 0.7) -> str:
    """Collection efficiency vs NA with the NA of record marked."""
    curve = np.asarray(curve, dtype=float)
    fig, ax = plt.subplots(figsize=(5.0, 3.6))
    ax.plot(curve[:, 0], curve[:, 1], "b-")
    ax.axvline(na_mark, color="gray", ls=":", lw=1.0)
    ax.set_xlabel("NA")
    ax.set_ylabel(r"$\eta_{col}$")
    ax.set_xlim(0.0, 1.0)
    ax.set_ylim(0.0, 1.02)
    ax.grid(alpha=0.3)
    return _save(fig, path)


def plot_sweep(result: SweepResult, path) -> str:
    """eta_col over the reduced-domain alignment offsets of one layer."""
    fig, ax = plt.subplots(figsize=(5.0, 4.0))
    sc = ax.scatter(result.offsets[:, 0], result.offsets[:, 1], c=result.eta_col,
                    cmap="viridis", s=60)
    ax.set_xlabel("offset u")
    ax.set_ylabel("offset v")
    ax.set_title(f"layer {result.layer_id} alignment sweep")
    ax.set_aspect("equal")
    fig.colorbar(sc, ax=ax, label=r"$\eta_{col}$")
    return _save(fig, path)


def plot_profiles(table: dict[int, np.ndarray], path) -> str:
    """Per-charge panels of normalized intermediate and far-field cuts vs NA."""
    charges = sorted(table)
    fig, axes = plt.subplots(1, len(charges), figsize=(3.1 * len(charges), 3.0),
                             sharey=True)
    axes = np.atleast_1d(axes)
    for ax, L in zip(axes, charges):
        rows = table[L]
        ax.plot(rows[:, 0], rows[:, 1], "r--", label="intermediate")
        ax.plot(rows[:, 0], rows[:, 2], "b-", label="far field")
        ax.set_title(f"L = {L}")
        ax.set_xlabel("NA")
        ax.grid(alpha=0.3)
    axes[0].set_ylabel("normalized intensity")
    axes[0].legend(fontsize=8)
    return _save(fig, path)


def plot_trace(trace: np.ndarray, path) -> str:
    """Objective evaluations and the running best over the optimizer budget."""
    trace = np.asarray(trace, dtype=float)
    fig, ax = plt.subplots(figsize=(5.0, 3.6))
    ax.plot(trace[:, 0], trace[:, -2], ".", ms=4, alpha=0.5, label="evaluation")
    ax.plot(trace[:, 0], trace[:, -1], "r-", label="best so far")
    ax.set_xlabel("evaluation")
    ax.set_ylabel(r"$\eta_{col} \times$ overlap")
    ax.grid(alpha=0.3)
    ax.legend(fontsize=8)
    return _save(fig, path)


def plot_convergence(table: np.ndarray, path) -> str:
    """RMS error of the discrete rings against the closed forms vs N."""
    table = np.asarray(table, dtype=float)
    fig, ax = plt.subplots(figsize=(5.0, 3.6))
    ax.loglog(table[:, 0], table[:, 1], "o-", label="intermediate field")
    ax.loglog(table[:, 0], table[:, 2], "s-", label="far field")
    ax.set_xlabel("dipoles per ring N")
    ax.set_ylabel("normalized-intensity RMS error")
    ax.grid(alpha=0.3, which="both")
    ax.legend(fontsize=8)
    return _save(fig, path)
