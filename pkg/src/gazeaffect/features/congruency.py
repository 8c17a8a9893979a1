"""Inter-observer visual congruency (IOVC) and center-bias fitting."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .density import GRID_COLS, GRID_ROWS, fixation_density_map

logger = logging.getLogger(__name__)

_trapezoid = getattr(np, "trapezoid", None) or np.trapz


class InsufficientData(ValueError):
    pass


@dataclass(frozen=True)
class IOVCScore:
    image_id: str | None
    mean_auc: float
    std_auc: float
    per_observer: tuple[float, ...] = ()

    def vector(self) -> np.ndarray:
        return np.array([self.mean_auc, self.std_auc])


def roc_auc(scores, positive) -> float:
    """Area under the ROC curve from a threshold sweep.

    Every distinct score is used as a threshold (predict positive when
    ``score >= threshold``) and the curve, anchored at (0, 0) and (1, 1), is
    integrated with the trapezoid rule. Returns NaN when either class is empty.
    """
    s = np.asarray(scores, dtype=float).ravel()
    pos = np.asarray(positive, dtype=bool).ravel()
    n_pos, n_neg = int(pos.sum()), int((~pos).sum())
    if n_pos == 0 or n_neg == 0:
        return float("nan")
    order = np.argsort(-s, kind="stable")
    s_sorted, p_sorted = s[order], pos[order]
    # last index of each run of equal scores
    cut = np.r_[np.flatnonzero(np.diff(s_sorted) != 0), s.size - 1]
    tp = np.cumsum(p_sorted)[cut]
    fp = np.cumsum(~p_sorted)[cut]
    tpr = np.r_[0.0, tp / n_pos]
    fpr = np.r_[0.0, fp / n_neg]
    return float(_trapezoid(tpr, fpr))


def fixated_cells(points, image_size, grid=(GRID_COLS, GRID_ROWS)) -> np.ndarray:
    """Boolean (rows, cols) mask of grid cells containing at least one point."""
    cols, rows = grid
    w, h = image_size
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    c = np.clip(np.floor(pts[:, 0] * cols / w), 0, cols - 1).astype(int)
    r = np.clip(np.floor(pts[:, 1] * rows / h), 0, rows - 1).astype(int)
    mask = np.zeros((rows, cols), dtype=bool)
    mask[r, c] = True
    return mask


def iovc(per_observer: Mapping[str, Sequence] | Sequence, image_size, kernel_sigma=None,
         grid=(GRID_COLS, GRID_ROWS), image_id=None) -> IOVCScore:
    """Leave-one-observer-out congruency of fixation locations on one image.

    For each observer, the density map of all other observers scores the
    grid cells; the cells containing the left-out observer's fixations are
    positives and all remaining cells negatives. Returns the mean and
    (population) standard deviation of the per-observer AUCs.
    """
    groups = list(per_observer.values()) if isinstance(per_observer, Mapping) else list(per_observer)
    groups = [np.asarray(g, dtype=float).reshape(-1, 2) for g in groups]
    groups = [g for g in groups if g.shape[0] > 0]
    if len(groups) < 2:
        raise InsufficientData("IOVC needs at least two observers with fixations")
    aucs = []
    for k, left_out in enumerate(groups):
        rest = np.vstack([g for j, g in enumerate(groups) if j != k])
        dm = fixation_density_map(rest, image_size, kernel_sigma, grid)
        a = roc_auc(dm.values, fixated_cells(left_out, image_size, grid))
        if np.isnan(a):
            logger.warning("IOVC: observer %d of image %s fixated every cell; skipped", k, image_id)
            continue
        aucs.append(a)
    if not aucs:
        raise InsufficientData("no observer yielded a defined AUC")
    a = np.asarray(aucs)
    return IOVCScore(image_id, float(a.mean()), float(a.std()), tuple(aucs))


@dataclass(frozen=True)
class CenterBiasModel:
    """Diagonal 2-D Gaussian over normalized locations in [-1, 1]^2."""

    mu: tuple[float, float]
    sigma: tuple[float, float]
    n: int = 0

    @property
    def degenerate(self) -> bool:
        return not (self.sigma[0] > 0 and self.sigma[1] > 0)


def normalize_locations(points, image_sizes) -> np.ndarray:
    """Map pixel locations to [-1, 1] with (0, 0) at the image centre, y down."""
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    sizes = np.broadcast_to(np.asarray(image_sizes, dtype=float), pts.shape)
    return 2.0 * pts / sizes - 1.0


def fit_center_bias(points, image_sizes=None, normalized=False) -> CenterBiasModel:
    """Fit the center-bias Gaussian to fixations pooled across images.

    Parameters
    ----------
    points : (n, 2) array
        Pixel locations, or normalized locations when ``normalized=True``.
    image_sizes : (2,) or (n, 2)
        Per-point ``(width, height)``; ignored when ``normalized``.
    """
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    if pts.shape[0] < 2:
        raise InsufficientData("center-bias fit needs at least two fixations")
    z = pts if normalized else normalize_locations(pts, image_sizes)
    mu = z.mean(axis=0)
    sd = z.std(axis=0, ddof=1)
    model = CenterBiasModel((float(mu[0]), float(mu[1])), (float(sd[0]), float(sd[1])), pts.shape[0])
    if model.degenerate:
        logger.warning("center-bias fit is degenerate (zero spread on an axis)")
    return model
