"""Mean/std and histogram representations of per-image event measures."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .density import ContractViolation

# kind -> (n_bins, lower, upper); upper=None means "image diagonal"
HISTOGRAM_SPECS = {
    "fix_duration": (60, 0.0, 2000.0),
    "sac_slope": (30, 0.0, 180.0),
    "sac_length": (50, 0.0, None),
}


def summary_rep(values) -> np.ndarray:
    """``[mean, std]`` with the n-1 denominator; std is 0 for a single value."""
    v = np.asarray(values, dtype=float).ravel()
    if v.size == 0:
        raise ValueError("summary_rep needs at least one value")
    std = float(v.std(ddof=1)) if v.size > 1 else 0.0
    return np.array([float(v.mean()), std])


def bin_edges(kind: str, upper: float | None = None, lower: float | None = None) -> np.ndarray:
    n, lo, hi = HISTOGRAM_SPECS[kind]
    lo = lo if lower is None else float(lower)
    hi = hi if upper is None else float(upper)
    if hi is None:
        raise ValueError(f"{kind} histogram needs an explicit upper bound (image diagonal)")
    if not hi > lo:
        raise ValueError(f"empty histogram range [{lo}, {hi}]")
    return lo + np.arange(n + 1) * ((hi - lo) / n)


def histogram_rep(values, kind: str, upper: float | None = None, lower: float | None = None,
                  normalize: bool = False) -> np.ndarray:
    """Counts of ``values`` in the fixed bins for ``kind``.

    Bins are half-open ``[e_k, e_{k+1})`` except the last, which is closed.
    Durations and lengths beyond the range land in the last bin (and below it
    in the first bin, in dataset-range mode). Slopes must lie in [0, 180).

    Parameters
    ----------
    kind : {"fix_duration", "sac_length", "sac_slope"}
    upper : float, optional
        Upper range bound; required for ``sac_length`` (the image diagonal).
    normalize : bool
        L1-normalize the counts (an empty histogram stays all-zero).
    """
    if kind not in HISTOGRAM_SPECS:
        raise ValueError(f"unknown histogram kind {kind!r}")
    v = np.asarray(values, dtype=float).ravel()
    if kind == "sac_slope" and np.any((v < 0) | (v >= 180)):
        raise ContractViolation("saccade slopes must lie in [0, 180)")
    if kind != "sac_slope" and np.any(v < 0):
        raise ContractViolation(f"{kind} values must be non-negative")
    edges = bin_edges(kind, upper, lower)
    n = edges.size - 1
    idx = np.clip(np.searchsorted(edges, v, side="right") - 1, 0, n - 1)
    counts = np.bincount(idx, minlength=n).astype(float)
    if normalize and counts.sum() > 0:
        counts /= counts.sum()
    return counts


class MeanStd(TransformerMixin, BaseEstimator):
    """Map each per-image value sequence to ``[mean, std]``."""

    def fit(self, X, y=None):
        return self

    def transform(self, X):
        return np.vstack([summary_rep(v) for v in X]) if len(X) else np.empty((0, 2))


class EventHistogram(TransformerMixin, BaseEstimator):
    """Histogram encoder for per-image event measures.

    With ``range_mode="global"`` the bins are the fixed constants of
    :data:`HISTOGRAM_SPECS` (``upper`` supplies the diagonal for lengths).
    With ``range_mode="dataset"`` the range is learned in :meth:`fit` as the
    minimum and maximum over all training values; slope bins stay fixed.
    """

    def __init__(self, kind="fix_duration", range_mode="global", upper=None, normalize=False):
        self.kind = kind
        self.range_mode = range_mode
        self.upper = upper
        self.normalize = normalize

    def fit(self, X, y=None):
        if self.range_mode not in ("global", "dataset"):
            raise ValueError("range_mode must be 'global' or 'dataset'")
        lo, hi = None, self.upper
        if self.range_mode == "dataset" and self.kind != "sac_slope":
            allv = np.concatenate([np.asarray(v, dtype=float).ravel() for v in X]) if len(X) else np.array([])
            if allv.size:
                lo, hi = float(allv.min()), float(allv.max())
                if hi <= lo:
                    hi = lo + 1.0
        self.lower_, self.upper_ = lo, hi
        self.edges_ = bin_edges(self.kind, hi, lo)
        return self

    def transform(self, X):
        check_is_fitted(self, "edges_")
        rows = [histogram_rep(v, self.kind, self.upper_, self.lower_, self.normalize) for v in X]
        return np.vstack(rows) if rows else np.empty((0, self.edges_.size - 1))
