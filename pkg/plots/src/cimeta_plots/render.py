"""Deterministic heatmap / region-diagram rendering.

Signed measures always use a diverging scale centered at 0 (bounds
default to +/- max |value|) so the sign structure survives; NaN cells
render in a distinct neutral grey with an attrition note.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .io import GridData, PairData

NEUTRAL = "#c8c8c8"
DPI = 150


def _diverging_cmap():
    cmap = plt.get_cmap("RdBu_r").copy()
    cmap.set_bad(NEUTRAL)
    return cmap


def _symmetric_bound(values: np.ndarray, bound: float | None) -> float:
    if bound is not None:
        if bound <= 0:
            raise ValueError(f"color-scale bound must be positive, got {bound}")
        return bound
    finite = values[np.isfinite(values)]
    peak = float(np.max(np.abs(finite))) if finite.size else 0.0
    return peak if peak > 0 else 1.0


def _finish(fig, ax, mesh, out_path, stamp, title, attrition):
    fig.colorbar(mesh, ax=ax)
    if title:
        ax.set_title(title)
    if attrition:
        fig.text(0.01, 0.05, f"attrition: {attrition} cell(s) shown neutral",
                 fontsize=7, color="0.3")
    if stamp:
        fig.text(0.01, 0.01, stamp, fontsize=6, color="0.4", family="monospace")
    fig.savefig(out_path, dpi=DPI)
    plt.close(fig)


def _grid_edges(centers: np.ndarray) -> np.ndarray:
    # cell edges midway between centers, extrapolated at the ends
    mids = (centers[1:] + centers[:-1]) / 2
    first = centers[0] - (mids[0] - centers[0]) if len(centers) > 1 else centers[0] - 0.5
    last = centers[-1] + (centers[-1] - mids[-1]) if len(centers) > 1 else centers[0] + 0.5
    return np.concatenate([[first], mids, [last]])


def _grid_mesh(ax, grid: GridData, bound):
    b = _symmetric_bound(grid.values, bound)
    masked = np.ma.masked_invalid(grid.values)
    x = _grid_edges(grid.param2)
    y = _grid_edges(grid.param1)
    return ax.pcolormesh(x, y, masked, cmap=_diverging_cmap(), vmin=-b, vmax=b)


def render_grid_heatmap(grid: GridData, out_path, stamp: str = "",
                        bound: float | None = None, title: str | None = None,
                        xlabel: str = "param2", ylabel: str = "param1") -> None:
    fig, ax = plt.subplots(figsize=(5.2, 4.4))
    mesh = _grid_mesh(ax, grid, bound)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    _finish(fig, ax, mesh, out_path, stamp, title, grid.attrition)


def render_region_diagram(grid: GridData, out_path, alpha1: float = 0.5,
                          stamp: str = "", bound: float | None = None,
                          title: str | None = None) -> None:
    """Heatmap with the two analytic zero contours overlaid.

    Axes follow the sweep convention param1 = alpha2 (vertical),
    param2 = beta (horizontal); the contours are alpha2 = -alpha1*beta
    and alpha2 = -beta/alpha1.
    """
    if alpha1 == 0:
        raise ValueError("alpha1 must be nonzero for the contour overlay")
    fig, ax = plt.subplots(figsize=(5.2, 4.4))
    mesh = _grid_mesh(ax, grid, bound)
    beta = np.linspace(float(grid.param2.min()), float(grid.param2.max()), 200)
    ax.plot(beta, -alpha1 * beta, color="red", lw=1.5,
            label=r"$\alpha_2 = -\alpha_1 \beta$")
    ax.plot(beta, -beta / alpha1, color="blue", lw=1.5,
            label=r"$\alpha_2 = -\beta / \alpha_1$")
    ax.set_xlim(_grid_edges(grid.param2)[[0, -1]])
    ax.set_ylim(_grid_edges(grid.param1)[[0, -1]])
    ax.set_xlabel(r"$\beta$")
    ax.set_ylabel(r"$\alpha_2$")
    ax.legend(loc="upper right", fontsize=7)
    _finish(fig, ax, mesh, out_path, stamp, title, grid.attrition)


def render_pair_matrix(pair: PairData, out_path, stamp: str = "",
                       bound: float | None = None, title: str | None = None) -> None:
    fig, ax = plt.subplots(figsize=(6.0, 5.2))
    b = _symmetric_bound(pair.values, bound)
    masked = np.ma.masked_invalid(pair.values)
    mesh = ax.imshow(masked, cmap=_diverging_cmap(), vmin=-b, vmax=b)
    ticks = range(len(pair.tests))
    ax.set_xticks(ticks, pair.tests, rotation=90, fontsize=6)
    ax.set_yticks(ticks, pair.tests, fontsize=6)
    attrition = int(np.sum(~np.isfinite(pair.values)))
    _finish(fig, ax, mesh, out_path, stamp, title, attrition)
