"""Raster figures with matplotlib (optional companion to the SVG output)."""
from __future__ import annotations

import numpy as np

from .render import PALETTE


def _draw(ax, result: dict):
    from matplotlib.patches import PathPatch
    from matplotlib.path import Path

    tiles = result.get("tiles") or []
    orient = result.get("orientations") or [1] * len(tiles)
    for w, tile in enumerate(tiles):
        pts = np.asarray(tile, dtype=float)
        codes = [Path.MOVETO] + [Path.LINETO] * (len(pts) - 1) + [Path.CLOSEPOLY]
        path = Path(np.vstack([pts, pts[:1]]), codes)
        ax.add_patch(PathPatch(path, facecolor=PALETTE[w % len(PALETTE)], edgecolor="k", lw=0.8,
                               alpha=0.6 if result.get("homology") else 1.0,
                               hatch="///" if orient[w] < 0 else None))
    region = result.get("region")
    if region is not None:
        r = np.asarray(region, dtype=float)
        r = np.vstack([r, r[:1]])
        ax.plot(r[:, 0], r[:, 1], color="#1f4fd8", lw=2)
    ax.set_aspect("equal")
    ax.autoscale_view()
    ax.set_axis_off()
    if result.get("title"):
        ax.set_title(result["title"], fontsize=9)


def save_png(result: dict, path, dpi: int = 150) -> None:
    """Write a single result or a sheet of panels to a PNG file."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    panels = result.get("panels") or [result]
    cols = min(int(result.get("columns", 4)), len(panels))
    rows = -(-len(panels) // cols)
    fig, axes = plt.subplots(rows, cols, figsize=(2.5 * cols, 2.5 * rows), squeeze=False)
    for ax in axes.flat:
        ax.set_axis_off()
    for ax, panel in zip(axes.flat, panels):
        _draw(ax, panel)
    fig.tight_layout()
    fig.savefig(path, dpi=dpi)
    plt.close(fig)
