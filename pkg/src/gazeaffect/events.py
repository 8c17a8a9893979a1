"""Fixation detection from raw gaze samples and saccade derivation."""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import groupby
from typing import Iterable, Sequence

import numpy as np
from sklearn.base import BaseEstimator

from .core import ContractViolation, Fixation, GazeSample, Saccade


@dataclass(frozen=True)
class DetectionParams:
    dispersion_threshold: float = 40.0
    min_duration: float = 100.0
    max_gap: float = 75.0

    def __post_init__(self):
        for name in ("dispersion_threshold", "min_duration", "max_gap"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be strictly positive")


def _sample_period(t: np.ndarray) -> float:
    d = np.diff(t)
    d = d[d > 0]
    return float(np.median(d)) if d.size else 0.0


def _segments(t, valid, max_gap, dt):
    """Split a trial into runs of valid samples, breaking on long invalid gaps."""
    idx = np.flatnonzero(valid)
    if idx.size == 0:
        return []
    out, start = [], 0
    for k in range(1, idx.size):
        a, b = idx[k - 1], idx[k]
        if b - a > 1 and (t[b] - t[a] - dt) > max_gap:
            out.append(idx[start:k])
            start = k
    out.append(idx[start:])
    return out


def _idt(t, x, y, dt, params):
    """Dispersion-threshold pass over one run of valid samples.

    Dispersion is the longer side of the bounding box of the window.
    Returns (first, last) index pairs into the run.
    """
    n = t.size
    thr, min_dur = params.dispersion_threshold, params.min_duration
    found = []
    i = 0
    while i < n:
        j = int(np.searchsorted(t, t[i] + min_dur - dt - 1e-9, side="left"))
        if j >= n:
            break
        x0, x1 = x[i : j + 1].min(), x[i : j + 1].max()
        y0, y1 = y[i : j + 1].min(), y[i : j + 1].max()
        if max(x1 - x0, y1 - y0) > thr:
            i += 1
            continue
        while j + 1 < n:
            nx0, nx1 = min(x0, x[j + 1]), max(x1, x[j + 1])
            ny0, ny1 = min(y0, y[j + 1]), max(y1, y[j + 1])
            if max(nx1 - nx0, ny1 - ny0) > thr:
                break
            x0, x1, y0, y1 = nx0, nx1, ny0, ny1
            j += 1
        found.append((i, j))
        i = j + 1
    return found


def _detect_trial(samples: Sequence[GazeSample], params: DetectionParams) -> list[Fixation]:
    t = np.array([s.t for s in samples], dtype=float)
    if np.any(np.diff(t) < 0):
        s = samples[0]
        raise ContractViolation(f"samples for ({s.observer_id}, {s.image_id}) are not time-sorted")
    x = np.array([s.x for s in samples], dtype=float)
    y = np.array([s.y for s in samples], dtype=float)
    valid = np.array([s.valid for s in samples], dtype=bool)
    dt = _sample_period(t)
    obs, img = samples[0].observer_id, samples[0].image_id

    fixations = []
    for seg in _segments(t, valid, params.max_gap, dt):
        ts, xs, ys = t[seg], x[seg], y[seg]
        for a, b in _idt(ts, xs, ys, dt, params):
            duration = ts[b] - ts[a] + dt
            if duration + 1e-9 < params.min_duration:
                continue
            fixations.append(
                Fixation(obs, img, float(xs[a : b + 1].mean()), float(ys[a : b + 1].mean()),
                         float(ts[a]), float(duration))
            )
    return fixations


def detect_fixations(samples: Iterable[GazeSample], params: DetectionParams | None = None) -> list[Fixation]:
    """Detect fixations with a dispersion-threshold (I-DT) scheme.

    Samples may cover several trials; each contiguous run of samples with the
    same ``(observer_id, image_id)`` is processed independently and must be
    sorted by time. A fixation's duration spans its first to last member
    sample plus one sample period, and its centroid is the member mean.
    Invalid samples are skipped when the gap they leave is at most
    ``params.max_gap``; longer gaps split the trial.
    """
    params = params or DetectionParams()
    out = []
    for _, grp in groupby(samples, key=lambda s: (s.observer_id, s.image_id)):
        grp = list(grp)
        if grp:
            out.extend(_detect_trial(grp, params))
    return out


def saccade_slope(dx: float, dy: float) -> float:
    """Orientation of a displacement in degrees, folded into [0, 180).

    Measured from the horizontal with the y-axis pointing down, so the
    angle grows clockwise on screen.
    """
    a = math.degrees(math.atan2(dy, dx)) % 180.0
    return 0.0 if a >= 180.0 else a


def derive_saccades(fixations: Sequence[Fixation]) -> list[Saccade]:
    """One saccade per consecutive pair of fixations of a single trial."""
    out = []
    for a, b in zip(fixations, fixations[1:]):
        dx, dy = b.x - a.x, b.y - a.y
        out.append(
            Saccade(a.observer_id, a.image_id, math.hypot(dx, dy), saccade_slope(dx, dy),
                    max(0.0, b.onset - a.offset))
        )
    return out


class FixationDetector(BaseEstimator):
    """Estimator wrapper around :func:`detect_fixations`.

    Stateless; ``fit`` only validates parameters so the detector can sit in
    a pipeline and be cloned or grid-searched.
    """

    def __init__(self, dispersion_threshold=40.0, min_duration=100.0, max_gap=75.0):
        self.dispersion_threshold = dispersion_threshold
        self.min_duration = min_duration
        self.max_gap = max_gap

    def _params(self):
        return DetectionParams(self.dispersion_threshold, self.min_duration, self.max_gap)

    def fit(self, samples=None, y=None):
        self.params_ = self._params()
        return self

    def transform(self, samples):
        return detect_fixations(samples, self._params())
