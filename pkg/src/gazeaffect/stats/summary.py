"""Per-image averages grouped by emotion class or observer gender."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np

from ..core import CLASS_NAMES, TrialSet

MEASURES = ("fix_duration", "sac_length", "sac_slope")
GROUPINGS = ("emotion_class", "gender")


class MissingMetadata(ValueError):
    pass


@dataclass(frozen=True)
class GroupStats:
    name: str
    mean: float
    std: float
    n: int
    values: tuple[float, ...]


@dataclass(frozen=True)
class BoxStats:
    name: str
    minimum: float
    q1: float
    median: float
    q3: float
    maximum: float
    lower_fence: float
    upper_fence: float
    n_outliers: int


def box_stats(name: str, values) -> BoxStats:
    """Quartiles (linear interpolation) and Tukey fences at 1.5 IQR."""
    v = np.asarray(values, dtype=float)
    q1, med, q3 = np.percentile(v, [25, 50, 75])
    iqr = q3 - q1
    lo, hi = q1 - 1.5 * iqr, q3 + 1.5 * iqr
    return BoxStats(name, float(v.min()), float(q1), float(med), float(q3), float(v.max()),
                    float(lo), float(hi), int(np.sum((v < lo) | (v > hi))))


@dataclass(frozen=True)
class GroupedSummary:
    measure: str
    group_by: str
    groups: tuple[GroupStats, ...]
    boxes: tuple[BoxStats, ...]

    def group_values(self) -> list[np.ndarray]:
        return [np.asarray(g.values) for g in self.groups]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["measure", "group", "mean", "std", "n"])
        for g in self.groups:
            w.writerow([self.measure, g.name, repr(g.mean), repr(g.std), g.n])
        return buf.getvalue()

    def box_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["measure", "group", "min", "q1", "median", "q3", "max",
                    "lower_fence", "upper_fence", "n_outliers"])
        for b in self.boxes:
            w.writerow([self.measure, b.name, repr(b.minimum), repr(b.q1), repr(b.median), repr(b.q3),
                        repr(b.maximum), repr(b.lower_fence), repr(b.upper_fence), b.n_outliers])
        return buf.getvalue()


def _events(trials: TrialSet, measure: str):
    """Yield ``(observer_id, image_id, value)`` for every event of a measure."""
    if measure == "fix_duration":
        return ((f.observer_id, f.image_id, f.duration) for f in trials.fixations)
    attr = {"sac_length": "length", "sac_slope": "slope"}[measure]
    return ((s.observer_id, s.image_id, getattr(s, attr)) for s in trials.saccades)


def per_image_means(trials: TrialSet, measure: str, by_gender: bool = False) -> dict:
    """Average of a measure per image, or per (image, gender) with ``by_gender``."""
    if measure not in MEASURES:
        raise ValueError(f"unknown measure {measure!r}; choose from {MEASURES}")
    acc: dict = {}
    for obs, img, v in _events(trials, measure):
        key = (img, trials.observer_gender[obs]) if by_gender else img
        s = acc.setdefault(key, [0.0, 0])
        s[0] += v
        s[1] += 1
    return {k: s / n for k, (s, n) in sorted(acc.items())}


def grouped_summary(trials: TrialSet, group_by: str = "emotion_class",
                    measure: str = "fix_duration") -> GroupedSummary:
    """Group per-image averages of ``measure`` by emotion class or gender.

    Each image contributes one value per group: its average over all events
    (emotion grouping) or over the events of observers of one gender (gender
    grouping). Groups without any image are omitted. Standard deviations use
    ``ddof=1`` and are 0 for a single image.
    """
    if group_by not in GROUPINGS:
        raise ValueError(f"unknown grouping {group_by!r}; choose from {GROUPINGS}")
    if group_by == "gender":
        unknown = [o for o in trials.observers if o not in trials.observer_gender]
        if not trials.observer_gender or unknown:
            raise MissingMetadata(
                "gender grouping needs an observer gender file"
                + (f"; no gender for observers {unknown[:5]}" if trials.observer_gender else ""))
        means = per_image_means(trials, measure, by_gender=True)
        names = sorted({g for _, g in means})
        buckets = {g: [v for (_, gg), v in means.items() if gg == g] for g in names}
    else:
        means = per_image_means(trials, measure)
        buckets = {name: [] for name in CLASS_NAMES}
        for img, v in means.items():
            buckets[CLASS_NAMES[int(trials.images[img].emotion_class)]].append(v)
    groups, boxes = [], []
    for name, vals in buckets.items():
        if not vals:
            continue
        v = np.asarray(vals)
        groups.append(GroupStats(name, float(v.mean()), float(v.std(ddof=1)) if v.size > 1 else 0.0,
                                 int(v.size), tuple(float(x) for x in v)))
        boxes.append(box_stats(name, v))
    return GroupedSummary(measure, group_by, tuple(groups), tuple(boxes))
