"""Assemble per-image feature channels from a TrialSet."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from ..core import TrialSet, fixation_array
from ..ingest import FeatureChannelFile
from .congruency import InsufficientData, iovc
from .density import DEFAULT_SIGMA_FRACTION, density_entropy, fixation_density_map
from .summary import EventHistogram, histogram_rep, summary_rep

logger = logging.getLogger(__name__)

CHANNEL_KINDS = (
    "fdm",
    "fdm_entropy",
    "iovc",
    "fix_duration_meanstd",
    "sac_length_meanstd",
    "sac_slope_meanstd",
    "fix_duration_hist",
    "sac_length_hist",
    "sac_slope_hist",
)


@dataclass(frozen=True)
class FeatureParams:
    kernel_sigma_fraction: float = DEFAULT_SIGMA_FRACTION
    histogram_range_mode: str = "global"
    histogram_normalize: bool = False


@dataclass(frozen=True)
class FeatureChannel:
    """A named matrix of per-image feature vectors.

    ``source`` is ``"gaze"`` or ``"visual"``; visual channels are
    L1-normalized before training.
    """

    name: str
    image_ids: tuple[str, ...]
    X: np.ndarray
    source: str = "gaze"
    missing: tuple[str, ...] = field(default=())

    def __post_init__(self):
        if self.X.ndim != 2 or self.X.shape[0] != len(self.image_ids):
            raise ValueError(f"channel {self.name}: X shape {self.X.shape} does not match ids")
        if len(set(self.image_ids)) != len(self.image_ids):
            raise ValueError(f"channel {self.name}: duplicate image ids")

    @property
    def dimension(self) -> int:
        return self.X.shape[1]

    def align(self, image_ids) -> np.ndarray:
        pos = {i: k for k, i in enumerate(self.image_ids)}
        return self.X[[pos[i] for i in image_ids]]

    def restrict(self, image_ids) -> "FeatureChannel":
        ids = tuple(i for i in image_ids)
        return FeatureChannel(self.name, ids, self.align(ids), self.source, self.missing)

    def to_file(self) -> FeatureChannelFile:
        return FeatureChannelFile(self.name, self.dimension,
                                  {i: self.X[k] for k, i in enumerate(self.image_ids)})

    @classmethod
    def from_file(cls, ff: FeatureChannelFile, source="visual") -> "FeatureChannel":
        ids = tuple(ff.rows)
        return cls(ff.channel_name, ids, ff.matrix(list(ids)), source)


def _per_image_values(trials: TrialSet, measure: str) -> dict[str, np.ndarray]:
    if measure == "fix_duration":
        out = {i: [] for i in trials.images}
        for f in trials.fixations:
            out[f.image_id].append(f.duration)
    else:
        attr = {"sac_length": "length", "sac_slope": "slope"}[measure]
        out = {i: [] for i in trials.images}
        for s in trials.saccades:
            out[s.image_id].append(getattr(s, attr))
    return {i: np.asarray(v, dtype=float) for i, v in out.items()}


def build_channel(trials: TrialSet, kind: str, params: FeatureParams | None = None,
                  observers=None) -> FeatureChannel:
    """Compute one gaze feature channel for every image that has the data.

    Images without the events a kind needs are listed in ``missing`` (and
    logged) rather than filled with a fabricated vector. ``observers``
    restricts the fixations used to a subset of observers.
    """
    if kind not in CHANNEL_KINDS:
        raise ValueError(f"unknown channel kind {kind!r}; choose from {CHANNEL_KINDS}")
    params = params or FeatureParams()
    if observers is not None:
        trials = trials.subset(observers=observers)

    ids, rows, missing = [], [], []
    if kind in ("fdm", "fdm_entropy", "iovc"):
        by_image = trials.fixations_by_image()
        for iid, rec in trials.images.items():
            per_obs = by_image[iid]
            sigma = params.kernel_sigma_fraction * rec.width
            if not per_obs:
                missing.append(iid)
                continue
            if kind == "iovc":
                try:
                    score = iovc({o: fixation_array(fs) for o, fs in per_obs.items()},
                                 rec.size, sigma, image_id=iid)
                except InsufficientData:
                    missing.append(iid)
                    continue
                vec = score.vector()
            else:
                pts = fixation_array(f for fs in per_obs.values() for f in fs)
                dm = fixation_density_map(pts, rec.size, sigma)
                vec = dm.vector() if kind == "fdm" else np.array([density_entropy(dm)])
            ids.append(iid)
            rows.append(vec)
    else:
        measure, rep = kind.rsplit("_", 1)
        values = _per_image_values(trials, measure)
        present = [i for i in trials.images if values[i].size > 0]
        missing = [i for i in trials.images if values[i].size == 0]
        if rep == "meanstd":
            rows = [summary_rep(values[i]) for i in present]
        elif params.histogram_range_mode == "dataset":
            enc = EventHistogram(measure, "dataset", normalize=params.histogram_normalize)
            enc.fit([values[i] for i in present])
            rows = list(enc.transform([values[i] for i in present])) if present else []
        else:
            rows = [
                histogram_rep(values[i], measure,
                              upper=trials.images[i].diagonal if measure == "sac_length" else None,
                              normalize=params.histogram_normalize)
                for i in present
            ]
        ids = present

    if missing:
        logger.warning("channel %s: %d images lack the required events: %s",
                       kind, len(missing), ", ".join(missing[:10]))
    dim = rows[0].size if rows else _dimension(kind)
    X = np.vstack(rows) if rows else np.empty((0, dim))
    return FeatureChannel(kind, tuple(ids), X, "gaze", tuple(missing))


def _dimension(kind: str) -> int:
    return {"fdm": 300, "fdm_entropy": 1, "iovc": 2, "fix_duration_hist": 60,
            "sac_length_hist": 50, "sac_slope_hist": 30}.get(kind, 2)
