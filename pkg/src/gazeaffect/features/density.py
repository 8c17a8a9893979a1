"""Fixation density maps and their entropy."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from ..core import ContractViolation

GRID_COLS, GRID_ROWS = 20, 15
DEFAULT_SIGMA_FRACTION = 0.02


class EmptyFixationSet(ValueError):
    """No fixations were available to build a density map."""


@dataclass(frozen=True)
class DensityMap:
    values: np.ndarray  # (rows, cols), sums to 1
    source_resolution: tuple[int, int]
    kernel_sigma: float

    @property
    def shape(self):
        return self.values.shape

    def vector(self) -> np.ndarray:
        """Row-major flattening (300 values for the default grid)."""
        return self.values.ravel()


def default_sigma(width: int) -> float:
    return DEFAULT_SIGMA_FRACTION * width


def _cell_profile(coords: np.ndarray, extent: int, n_cells: int, sigma: float) -> np.ndarray:
    """Box-averaged 1-D Gaussian profiles, shape (len(coords), n_cells).

    Pixel ``i`` is sampled at coordinate ``i`` and belongs to cell
    ``floor(i * n_cells / extent)``.
    """
    px = np.arange(extent, dtype=float)
    g = np.exp(-0.5 * ((px[None, :] - coords[:, None]) / sigma) ** 2)
    cell = (np.arange(extent) * n_cells) // extent
    starts = np.flatnonzero(np.r_[True, np.diff(cell) > 0])
    counts = np.diff(np.r_[starts, extent])
    return np.add.reduceat(g, starts, axis=1) / counts


def fixation_density_map(points, image_size, kernel_sigma: float | None = None,
                         grid=(GRID_COLS, GRID_ROWS)) -> DensityMap:
    """Gaussian-mixture density of fixation locations, averaged down to a coarse grid.

    Each fixation contributes an isotropic unit-mass Gaussian evaluated at
    every image pixel; the full-resolution sum is box-averaged onto a
    ``grid = (cols, rows)`` lattice and renormalized to sum to one.

    Parameters
    ----------
    points : array-like of shape (n, 2)
        Fixation centroids ``(x, y)`` in pixel coordinates.
    image_size : (width, height)
    kernel_sigma : float, optional
        Kernel standard deviation in pixels. Defaults to 2% of the width.
    """
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    if pts.shape[0] == 0:
        raise EmptyFixationSet("cannot build a density map from zero fixations")
    width, height = int(image_size[0]), int(image_size[1])
    sigma = default_sigma(width) if kernel_sigma is None else float(kernel_sigma)
    if not sigma > 0:
        raise ValueError("kernel_sigma must be positive")
    cols, rows = grid
    gx = _cell_profile(pts[:, 0], width, cols, sigma)
    gy = _cell_profile(pts[:, 1], height, rows, sigma)
    m = (gy.T @ gx) / (2.0 * np.pi * sigma**2)
    total = m.sum()
    if not total > 0:
        # kernels too narrow to reach any pixel centre; fall back to hard binning
        m = np.zeros((rows, cols))
        c = np.clip((pts[:, 0] * cols) // width, 0, cols - 1).astype(int)
        r = np.clip((pts[:, 1] * rows) // height, 0, rows - 1).astype(int)
        np.add.at(m, (r, c), 1.0)
        total = m.sum()
    return DensityMap(m / total, (width, height), sigma)


def density_entropy(density) -> float:
    """Shannon entropy of a normalized density map, in bits (0 log 0 = 0)."""
    p = np.asarray(density.values if isinstance(density, DensityMap) else density, dtype=float).ravel()
    if np.any(p < 0) or abs(p.sum() - 1.0) > 1e-9:
        raise ContractViolation("density map must be non-negative and sum to 1")
    nz = p[p > 0]
    return float(-(nz * np.log2(nz)).sum())


class FixationDensityMap(TransformerMixin, BaseEstimator):
    """Encode per-image fixation point sets as flattened density maps.

    ``X`` is a sequence of ``(n_i, 2)`` point arrays, one per image.
    ``image_size`` may be a single ``(width, height)`` or one per image passed
    to :meth:`transform` through ``sizes``.
    """

    def __init__(self, image_size=(1024, 768), kernel_sigma=None, grid=(GRID_COLS, GRID_ROWS)):
        self.image_size = image_size
        self.kernel_sigma = kernel_sigma
        self.grid = grid

    def fit(self, X, y=None):
        self.n_features_out_ = self.grid[0] * self.grid[1]
        return self

    def transform(self, X, sizes=None):
        sizes = sizes if sizes is not None else [self.image_size] * len(X)
        return np.vstack([
            fixation_density_map(p, s, self.kernel_sigma, self.grid).vector() for p, s in zip(X, sizes)
        ]) if len(X) else np.empty((0, self.grid[0] * self.grid[1]))


class DensityEntropy(FixationDensityMap):
    """Entropy (bits) of each image's density map, as a one-column feature."""

    def fit(self, X, y=None):
        self.n_features_out_ = 1
        return self

    def transform(self, X, sizes=None):
        sizes = sizes if sizes is not None else [self.image_size] * len(X)
        return np.array(
            [[density_entropy(fixation_density_map(p, s, self.kernel_sigma, self.grid))]
             for p, s in zip(X, sizes)]
        ).reshape(-1, 1)
