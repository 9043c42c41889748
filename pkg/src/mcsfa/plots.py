"""Static vector-graphics emitters for features, occupancy, and sweep grids.

All figures are written as SVG with a fixed hash salt and no embedded date,
so rerunning a sweep reproduces the files byte for byte.
"""

from __future__ import annotations

import math
from pathlib import Path

import matplotlib
import numpy as np

matplotlib.use("Agg")
matplotlib.rcParams["svg.hashsalt"] = "mcsfa"

import matplotlib.pyplot as plt  # noqa: E402  (backend must be pinned first)

from .harness import ExperimentResult
from .regress import symlog
from .spectral import SpectralBasis

HIGHLIGHT_COLOR = "#7b2d8b"
DIM_COLOR = "0.75"
MARKER_COLOR = "#d62728"

PLOT_KINDS = ("features_1d", "features_2d", "stationary", "heatmap_logmse", "heatmap_diff")


def _save(fig, path: str | Path) -> Path:
    path = Path(path)
    try:
        fig.savefig(path, format="svg", metadata={"Date": None})
    except OSError as exc:
        raise OSError(f"failed to write plot to {path}: {exc}") from exc
    finally:
        plt.close(fig)
    return path


def best_cells(results: list[ExperimentResult]) -> dict[int, float]:
    """Per feature count, the directedness value of minimal reported MSE.

    Only rows with status "ok" participate; feature counts whose cells all
    skipped are absent from the map.
    """
    best: dict[int, tuple[float, float]] = {}
    for r in results:
        if r.status != "ok" or math.isnan(r.mse_weighted):
            continue
        if r.e not in best or r.mse_weighted < best[r.e][0]:
            best[r.e] = (r.mse_weighted, r.param)
    return {e: param for e, (_, param) in best.items()}


def _grid_from_results(results: list[ExperimentResult], value_of) -> tuple[np.ndarray, list[float], list[int]]:
    params = sorted({r.param for r in results})
    counts = sorted({r.e for r in results})
    grid = np.full((len(params), len(counts)), np.nan)
    for r in results:
        grid[params.index(r.param), counts.index(r.e)] = value_of(r)
    return grid, params, counts


def plot_features_1d(basis: SpectralBasis, path: str | Path, highlight: int = 3) -> Path:
    """Overlay of all feature columns; the slowest few stand out."""
    fig, ax = plt.subplots(figsize=(7, 3.2))
    n = basis.Y.shape[0]
    xs = np.arange(n)
    for j in range(basis.n_features - 1, highlight - 1, -1):
        ax.plot(xs, basis.Y[:, j], color=DIM_COLOR, linewidth=0.6)
    for j in range(min(highlight, basis.n_features) - 1, -1, -1):
        ax.plot(xs, basis.Y[:, j], color=HIGHLIGHT_COLOR, linewidth=1.4)
    ax.set_xlabel("state")
    ax.set_ylabel("feature value")
    fig.tight_layout()
    return _save(fig, path)


def plot_features_2d(basis: SpectralBasis, shape: tuple[int, int], path: str | Path,
                     n_shown: int = 6) -> Path:
    """Per-state color maps of the first features on the lattice."""
    width, height = shape
    n_shown = min(n_shown, basis.n_features)
    cols = min(3, n_shown)
    rows = -(-n_shown // cols)
    fig, axes = plt.subplots(rows, cols, figsize=(3.0 * cols, 2.6 * rows), squeeze=False)
    for j in range(rows * cols):
        ax = axes[j // cols][j % cols]
        if j >= n_shown:
            ax.axis("off")
            continue
        img = basis.Y[:, j].reshape(height, width)
        limit = float(np.max(np.abs(img)))
        m = ax.imshow(img, origin="lower", cmap="RdBu_r", vmin=-limit, vmax=limit)
        ax.set_title(f"feature {j + 1}", fontsize=9)
        fig.colorbar(m, ax=ax, shrink=0.8)
    fig.tight_layout()
    return _save(fig, path)


def plot_stationary(mu: np.ndarray, path: str | Path, shape: tuple[int, int] | None = None) -> Path:
    """Occupancy per state: a line for chains, a map for lattices."""
    if shape is None:
        fig, ax = plt.subplots(figsize=(7, 2.6))
        ax.plot(np.arange(mu.shape[0]), mu, color=HIGHLIGHT_COLOR)
        ax.set_xlabel("state")
        ax.set_ylabel("stationary probability")
    else:
        width, height = shape
        fig, ax = plt.subplots(figsize=(4.2, 3.4))
        m = ax.imshow(mu.reshape(height, width), origin="lower", cmap="viridis")
        fig.colorbar(m, ax=ax)
        ax.set_xlabel("x")
        ax.set_ylabel("y")
    fig.tight_layout()
    return _save(fig, path)


def plot_heatmap_logmse(results: list[ExperimentResult], path: str | Path) -> Path:
    """log-MSE over (directedness, feature count) with per-column best markers."""
    grid, params, counts = _grid_from_results(results, lambda r: r.log_mse)
    fig, ax = plt.subplots(figsize=(0.55 * len(counts) + 2.2, 0.45 * len(params) + 1.8))
    masked = np.ma.masked_invalid(grid)
    m = ax.pcolormesh(masked, cmap="viridis", edgecolors="white", linewidth=0.5)
    fig.colorbar(m, ax=ax, label="log MSE")
    for e, param in best_cells(results).items():
        ax.plot(counts.index(e) + 0.5, params.index(param) + 0.5, "o",
                color=MARKER_COLOR, markersize=5)
    ax.set_xticks(np.arange(len(counts)) + 0.5, [str(c) for c in counts])
    ax.set_yticks(np.arange(len(params)) + 0.5, [f"{p:g}" for p in params])
    ax.set_xlabel("number of features")
    ax.set_ylabel("directedness parameter")
    fig.tight_layout()
    return _save(fig, path)


def plot_heatmap_diff(before: list[ExperimentResult], after: list[ExperimentResult],
                      path: str | Path) -> Path:
    """-symlog(mse_before - mse_after) as a diverging map centered at zero."""
    by_key = {(r.param, r.reward, r.e): r for r in after}
    diffs = []
    for b in before:
        a = by_key.get((b.param, b.reward, b.e))
        if a is None:
            raise ValueError(f"no matching cell for {(b.param, b.reward, b.e)} in 'after' results")
        if b.status != "ok" or a.status != "ok":
            value = float("nan")
        else:
            value = -symlog(b.mse_weighted - a.mse_weighted)
        diffs.append(ExperimentResult(b.env, b.behavior, b.param, b.reward, b.e, b.correction,
                                      float("nan"), float("nan"), value, b.status))
    grid, params, counts = _grid_from_results(diffs, lambda r: r.log_mse)
    fig, ax = plt.subplots(figsize=(0.55 * len(counts) + 2.2, 0.45 * len(params) + 1.8))
    finite = grid[np.isfinite(grid)]
    limit = float(np.max(np.abs(finite))) if finite.size and np.max(np.abs(finite)) > 0 else 1.0
    masked = np.ma.masked_invalid(grid)
    m = ax.pcolormesh(masked, cmap="RdBu_r", vmin=-limit, vmax=limit,
                      edgecolors="white", linewidth=0.5)
    fig.colorbar(m, ax=ax, label="-symlog(MSE difference)")
    ax.set_xticks(np.arange(len(counts)) + 0.5, [str(c) for c in counts])
    ax.set_yticks(np.arange(len(params)) + 0.5, [f"{p:g}" for p in params])
    ax.set_xlabel("number of features")
    ax.set_ylabel("directedness parameter")
    fig.tight_layout()
    return _save(fig, path)


def emit_plots(data, kind: str, path: str | Path, **options) -> Path:
    """Dispatch on kind; see the individual plot functions for data shapes.

    features_1d: SpectralBasis. features_2d: SpectralBasis with a
    shape=(width, height) option. stationary: the mu vector (shape option
    for lattices). heatmap_logmse: rows of one reward position and
    correction. heatmap_diff: (before_rows, after_rows).
    """
    if kind == "features_1d":
        return plot_features_1d(data, path, **options)
    if kind == "features_2d":
        return plot_features_2d(data, options.pop("shape"), path, **options)
    if kind == "stationary":
        return plot_stationary(data, path, **options)
    if kind == "heatmap_logmse":
        return plot_heatmap_logmse(data, path)
    if kind == "heatmap_diff":
        before, after = data
        return plot_heatmap_diff(before, after, path)
    raise ValueError(f"unknown plot kind '{kind}'; expected one of {PLOT_KINDS}")
