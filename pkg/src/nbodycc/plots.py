"""Figure rendering for the CLI report path (headless, files only)."""

import os

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


def _draw_configuration(ax, q: np.ndarray, m: np.ndarray, title: str = ""):
    n, d = q.shape
    size = 120.0 * m / m.max()
    if d == 2:
        for i in range(n):
            for j in range(i + 1, n):
                ax.plot(*zip(q[i], q[j]), color="0.8", lw=0.6, zorder=1)
        ax.scatter(q[:, 0], q[:, 1], s=size, zorder=2)
        for i in range(n):
            ax.annotate(str(i + 1), q[i], textcoords="offset points", xytext=(4, 4), fontsize=8)
        ax.set_aspect("equal")
    else:
        for i in range(n):
            for j in range(i + 1, n):
                ax.plot(*zip(q[i], q[j]), color="0.8", lw=0.6)
        ax.scatter(q[:, 0], q[:, 1], q[:, 2], s=size)
        span = np.abs(q).max() * 1.2
        ax.set_xlim(-span, span)
        ax.set_ylim(-span, span)
        ax.set_zlim(-span, span)
    ax.set_title(title, fontsize=9)


def save_configuration_figure(q: np.ndarray, m: np.ndarray, path: str, title: str = "") -> str:
    fig = plt.figure(figsize=(4, 4))
    ax = fig.add_subplot(projection="3d" if q.shape[1] == 3 else None)
    _draw_configuration(ax, q, m, title)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def save_census_figures(records, m: np.ndarray, outdir: str, prefix: str = "class") -> list[str]:
    paths = []
    for i, rec in enumerate(records):
        name = f"{prefix}_{i:02d}.png"
        title = f"class {i}: U = {rec.u_value:.6g}"
        paths.append(save_configuration_figure(rec.q, m, os.path.join(outdir, name), title))
    return paths


def save_strip_figure(strip_fn, tstar: float, zstar: float, path: str) -> str:
    """Contour map of a strip potential with the located maximum marked."""
    ts = np.linspace(0.02, np.pi / 2 - 0.02, 160)
    zs = np.geomspace(0.02, 2.5, 160)
    tt, zz = np.meshgrid(ts, zs)
    vals = np.vectorize(strip_fn)(tt, zz)
    fig, ax = plt.subplots(figsize=(5, 4))
    levels = np.quantile(vals, np.linspace(0.35, 1.0, 24))
    cs = ax.contourf(tt, zz, vals, levels=np.unique(levels), cmap="viridis")
    fig.colorbar(cs, ax=ax, label="restricted potential")
    ax.plot([tstar], [zstar], "r*", ms=12)
    ax.set_xlabel("t")
    ax.set_ylabel("z")
    ax.set_yscale("log")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def save_drift_figure(times, drifts, path: str) -> str:
    fig, ax = plt.subplots(figsize=(5, 3.2))
    ax.semilogy(times, np.maximum(drifts, 1e-18))
    ax.set_xlabel("time")
    ax.set_ylabel("drift from rigid rotation")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def save_pairing_histogram(values, path: str) -> str:
    fig, ax = plt.subplots(figsize=(5, 3.2))
    ax.hist(values, bins=60)
    ax.set_xlabel("projected gradient pairing at the outermost body")
    ax.set_ylabel("count")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path
