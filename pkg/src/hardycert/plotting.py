"""Matplotlib rendering of region masks and objective surfaces."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .envelope import ConcaveCover, GridSpec, RegionMask
from .hardy import GOLDEN

DPI = 150


def _region_extent(grid: GridSpec):
    return (grid.delta, 1.0 - grid.delta, grid.delta, 1.0 - grid.delta)


def plot_region(mask: RegionMask, path: str, title: str = "",
                overlay: RegionMask | None = None, mark_golden: bool = True):
    """Filled region plot on the (r,s) square; optional lighter overlay region."""
    fig, ax = plt.subplots(figsize=(4.2, 4.0))
    extent = _region_extent(mask.grid)
    if overlay is not None:
        ax.imshow(overlay.mask.T, origin="lower", extent=extent, cmap="Blues",
                  vmin=0, vmax=2.5, alpha=0.6, aspect="auto")
    ax.imshow(np.ma.masked_where(~mask.mask.T, mask.mask.T), origin="lower",
              extent=extent, cmap="Blues", vmin=0, vmax=1.2, aspect="auto")
    if mark_golden:
        ax.plot([GOLDEN], [GOLDEN], "o", color="navy", markersize=5)
    ax.set_xlabel("r")
    ax.set_ylabel("s")
    ax.set_xlim(0, 1)
    ax.set_ylim(0, 1)
    if title:
        ax.set_title(title, fontsize=10)
    fig.tight_layout()
    fig.savefig(path, dpi=DPI)
    plt.close(fig)


def plot_surface(f, grid: GridSpec, path: str, cover: ConcaveCover | None = None,
                 title: str = ""):
    """3D surface of an objective, optionally with its concave cover on top."""
    rr, ss = grid.mesh()
    zz = np.asarray(f(rr, ss), dtype=float)
    fig = plt.figure(figsize=(5.0, 4.2))
    ax = fig.add_subplot(projection="3d")
    stride = max(1, grid.n // 80)
    ax.plot_surface(rr[::stride, ::stride], ss[::stride, ::stride],
                    zz[::stride, ::stride], cmap="viridis", alpha=0.9,
                    linewidth=0, antialiased=True)
    if cover is not None:
        cz = cover.evaluate(rr[::stride, ::stride], ss[::stride, ::stride])
        ax.plot_wireframe(rr[::stride, ::stride], ss[::stride, ::stride], cz,
                          color="crimson", linewidth=0.3, alpha=0.5)
    ax.set_xlabel("r")
    ax.set_ylabel("s")
    if title:
        ax.set_title(title, fontsize=10)
    fig.tight_layout()
    fig.savefig(path, dpi=DPI)
    plt.close(fig)


def plot_union(union: RegionMask, path: str, title: str = ""):
    plot_region(union, path, title=title, mark_golden=False)
