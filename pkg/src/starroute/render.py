"""Figure rendering for scenes, solutions, and objective manifolds.

Everything is drawn with matplotlib and written as self-contained SVG.
Output is kept reproducible: fixed hash salt for element ids and no date
metadata.
"""
from __future__ import annotations

from typing import Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np
from matplotlib import cm, colors
from matplotlib.patches import Polygon as MplPolygon

from .geom import Point, Polygon

matplotlib.rcParams["svg.hashsalt"] = "starroute"

REGION_CMAP = "YlOrRd"
OBSTACLE_COLOR = "#30303a"
HULL_COLOR = "#7b2fbe"
SITE_COLOR = "#1f5fbf"
CENTER_COLOR = "#c01616"
PATH_COLOR = "#2e8b57"


def save_svg(fig, path: str) -> None:
    fig.savefig(path, format="svg", metadata={"Date": None}, bbox_inches="tight")
    plt.close(fig)


def _polygon_xy(poly: Polygon) -> np.ndarray:
    return np.array([[p.x, p.y] for p in poly.vertices])


def scene_figure(
    sites: Sequence[Point],
    regions: Sequence[tuple[Polygon, float]] = (),
    obstacles: Sequence[Polygon] = (),
    hull: Polygon | None = None,
    grid_lines: tuple[np.ndarray, np.ndarray] | None = None,
    center: Point | None = None,
    routes: Sequence[Sequence[Point]] = (),
    title: str = "",
):
    """Scene layout: regions tinted by weight, obstacles filled, hull outline,
    site markers, route polylines, and the solved center."""
    fig, ax = plt.subplots(figsize=(6.4, 6.4))
    ax.set_aspect("equal")

    if regions:
        weights = [w for _, w in regions]
        norm = colors.Normalize(vmin=min(weights), vmax=max(weights))
        cmap = matplotlib.colormaps[REGION_CMAP]
        for poly, w in regions:
            ax.add_patch(
                MplPolygon(_polygon_xy(poly), closed=True, facecolor=cmap(norm(w)),
                           edgecolor="none", alpha=0.75, zorder=1)
            )
        sm = cm.ScalarMappable(norm=norm, cmap=cmap)
        fig.colorbar(sm, ax=ax, shrink=0.8, label="region weight")

    for poly in obstacles:
        ax.add_patch(
            MplPolygon(_polygon_xy(poly), closed=True, facecolor=OBSTACLE_COLOR,
                       edgecolor="black", zorder=2)
        )

    if grid_lines is not None:
        xs, ys = grid_lines
        for x in xs:
            ax.axvline(x, color="0.82", lw=0.5, zorder=0)
        for y in ys:
            ax.axhline(y, color="0.82", lw=0.5, zorder=0)

    if hull is not None:
        ring = np.vstack([_polygon_xy(hull), _polygon_xy(hull)[:1]])
        ax.plot(ring[:, 0], ring[:, 1], color=HULL_COLOR, lw=1.8, zorder=3, label="hull")

    for route in routes:
        xs = [p.x for p in route]
        ys = [p.y for p in route]
        ax.plot(xs, ys, color=PATH_COLOR, lw=1.2, alpha=0.9, zorder=4)

    ax.plot([p.x for p in sites], [p.y for p in sites], "o", color=SITE_COLOR,
            ms=7, zorder=5, label="sites")
    if center is not None:
        ax.plot([center.x], [center.y], "*", color=CENTER_COLOR, ms=14, zorder=6,
                label="center")
    if title:
        ax.set_title(title)
    ax.legend(loc="upper right", fontsize=8)
    return fig


def manifold_figure(
    xs: np.ndarray,
    ys: np.ndarray,
    values: np.ndarray,
    sites: Sequence[Point],
    hull: Polygon | None = None,
    title: str = "",
):
    """Objective heatmap over a lattice; NaN cells (blocked) render as gaps."""
    fig, ax = plt.subplots(figsize=(6.8, 6.0))
    ax.set_aspect("equal")
    cmap = matplotlib.colormaps["viridis"].copy()
    cmap.set_bad(color="white")
    masked = np.ma.masked_invalid(values)
    mesh = ax.pcolormesh(xs, ys, masked, cmap=cmap, shading="nearest", zorder=1,
                         rasterized=True)
    fig.colorbar(mesh, ax=ax, shrink=0.85, label="total connection cost")
    if hull is not None:
        ring = np.vstack([_polygon_xy(hull), _polygon_xy(hull)[:1]])
        ax.plot(ring[:, 0], ring[:, 1], color=HULL_COLOR, lw=1.5, zorder=3)
    ax.plot([p.x for p in sites], [p.y for p in sites], "o", color="white",
            mec="black", ms=6, zorder=4)
    if title:
        ax.set_title(title)
    return fig
