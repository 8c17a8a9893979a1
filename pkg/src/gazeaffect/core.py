"""Domain types shared across the package: gaze events, image records and trial sets."""

from __future__ import annotations

import logging
import math
from collections import defaultdict
from dataclasses import dataclass, field, replace
from enum import IntEnum
from typing import Iterable, Mapping

import numpy as np

logger = logging.getLogger(__name__)

SAM_MIN, SAM_MAX = 1.0, 9.0
NEUTRAL_LOW, NEUTRAL_HIGH = 4.0, 6.0
SCENARIOS = ("s95", "s296", "s382")


class GazeDomainError(ValueError):
    """Raised when a value falls outside the domain an operation accepts."""


class ContractViolation(ValueError):
    """Raised when an input breaks an operation's precondition."""


class EmotionClass(IntEnum):
    UNPLEASANT = 0
    NEUTRAL = 1
    PLEASANT = 2

    @property
    def label(self) -> str:
        return self.name.lower()

    @classmethod
    def parse(cls, value) -> "EmotionClass":
        if isinstance(value, str):
            return cls[value.strip().upper()]
        return cls(int(value))


CLASS_NAMES = tuple(c.label for c in EmotionClass)


def label_emotion_class(sam_mean: float) -> EmotionClass:
    """Map a mean SAM valence score to its emotion class.

    The neutral band is closed: scores in [4, 6] are neutral, below 4
    unpleasant and above 6 pleasant.
    """
    s = float(sam_mean)
    if not (SAM_MIN <= s <= SAM_MAX) or math.isnan(s):
        raise GazeDomainError(f"SAM score {sam_mean!r} outside [{SAM_MIN}, {SAM_MAX}]")
    if s < NEUTRAL_LOW:
        return EmotionClass.UNPLEASANT
    if s > NEUTRAL_HIGH:
        return EmotionClass.PLEASANT
    return EmotionClass.NEUTRAL


@dataclass(frozen=True, slots=True)
class GazeSample:
    observer_id: str
    image_id: str
    t: float
    x: float
    y: float
    valid: bool = True

    def __post_init__(self):
        if self.t < 0:
            raise GazeDomainError(f"negative timestamp {self.t}")


@dataclass(frozen=True, slots=True)
class Fixation:
    observer_id: str
    image_id: str
    x: float
    y: float
    onset: float
    duration: float
    clamped: bool = False

    def __post_init__(self):
        if not self.duration > 0:
            raise GazeDomainError(f"fixation duration must be positive, got {self.duration}")

    @property
    def offset(self) -> float:
        return self.onset + self.duration

    def clamp_to(self, width: int, height: int) -> "Fixation":
        """Clamp the centroid into the pixel grid ``[0, width-1] x [0, height-1]``."""
        x = min(max(self.x, 0.0), width - 1.0)
        y = min(max(self.y, 0.0), height - 1.0)
        if x == self.x and y == self.y:
            return self
        return replace(self, x=x, y=y, clamped=True)


@dataclass(frozen=True, slots=True)
class Saccade:
    observer_id: str
    image_id: str
    length: float
    slope: float
    duration: float

    def __post_init__(self):
        if self.length < 0:
            raise GazeDomainError(f"negative saccade length {self.length}")
        if not 0.0 <= self.slope < 180.0:
            raise GazeDomainError(f"saccade slope {self.slope} outside [0, 180)")


@dataclass(frozen=True)
class ImageRecord:
    image_id: str
    sam_mean_all: float
    sam_mean_male: float | None = None
    sam_mean_female: float | None = None
    width: int = 1024
    height: int = 768
    scenarios: frozenset = frozenset()

    def __post_init__(self):
        for name in ("sam_mean_all", "sam_mean_male", "sam_mean_female"):
            v = getattr(self, name)
            if v is not None and not SAM_MIN <= v <= SAM_MAX:
                raise GazeDomainError(f"{self.image_id}: {name}={v} outside [1, 9]")
        if self.width <= 0 or self.height <= 0:
            raise GazeDomainError(f"{self.image_id}: non-positive image size")
        unknown = set(self.scenarios) - set(SCENARIOS)
        if unknown:
            raise GazeDomainError(f"{self.image_id}: unknown scenarios {sorted(unknown)}")

    @property
    def emotion_class(self) -> EmotionClass:
        return label_emotion_class(self.sam_mean_all)

    @property
    def size(self) -> tuple[int, int]:
        return (self.width, self.height)

    @property
    def diagonal(self) -> float:
        return math.hypot(self.width, self.height)


@dataclass(frozen=True)
class TrialSet:
    """An immutable collection of images, fixations and saccades.

    Build instances with :meth:`build`, which validates references, clamps
    off-image fixations, orders fixations per trial and derives saccades.
    """

    images: Mapping[str, ImageRecord]
    fixations: tuple[Fixation, ...]
    saccades: tuple[Saccade, ...]
    observers: tuple[str, ...]
    observer_gender: Mapping[str, str] = field(default_factory=dict)

    @classmethod
    def build(
        cls,
        images: Iterable[ImageRecord],
        fixations: Iterable[Fixation],
        observers: Iterable[str] | None = None,
        observer_gender: Mapping[str, str] | None = None,
    ) -> "TrialSet":
        from .events import derive_saccades

        image_map = {}
        for rec in images:
            if rec.image_id in image_map:
                raise GazeDomainError(f"duplicate image_id {rec.image_id!r}")
            image_map[rec.image_id] = rec

        trials = defaultdict(list)
        n_clamped = 0
        for fx in fixations:
            rec = image_map.get(fx.image_id)
            if rec is None:
                raise GazeDomainError(f"fixation references unknown image {fx.image_id!r}")
            c = fx.clamp_to(rec.width, rec.height)
            n_clamped += c is not fx
            trials[(fx.observer_id, fx.image_id)].append(c)
        if n_clamped:
            logger.warning("clamped %d off-image fixations to the image border", n_clamped)

        ordered, saccades = [], []
        for key in sorted(trials):
            seq = sorted(trials[key], key=lambda f: f.onset)
            ordered.extend(seq)
            saccades.extend(derive_saccades(seq))

        obs = set(observers or ()) | {k[0] for k in trials}
        return cls(
            images=dict(sorted(image_map.items())),
            fixations=tuple(ordered),
            saccades=tuple(saccades),
            observers=tuple(sorted(obs)),
            observer_gender=dict(observer_gender or {}),
        )

    def subset(self, image_ids: Iterable[str] | None = None, observers: Iterable[str] | None = None) -> "TrialSet":
        """Restrict to the given images and/or observers, re-deriving saccades."""
        keep_img = set(self.images) if image_ids is None else set(image_ids)
        keep_obs = set(self.observers) if observers is None else set(observers)
        missing = keep_img - set(self.images)
        if missing:
            raise GazeDomainError(f"unknown image ids: {sorted(missing)[:5]}")
        return TrialSet.build(
            [self.images[i] for i in sorted(keep_img)],
            [f for f in self.fixations if f.image_id in keep_img and f.observer_id in keep_obs],
            observers=sorted(keep_obs),
            observer_gender={o: g for o, g in self.observer_gender.items() if o in keep_obs},
        )

    def scenario(self, name: str) -> "TrialSet":
        return self.subset([i for i, r in self.images.items() if name in r.scenarios])

    def fixations_by_image(self) -> dict[str, dict[str, list[Fixation]]]:
        """Nested ``image_id -> observer_id -> fixations`` (time-ordered)."""
        out: dict[str, dict[str, list[Fixation]]] = {i: {} for i in self.images}
        for f in self.fixations:
            out[f.image_id].setdefault(f.observer_id, []).append(f)
        return out

    def saccades_by_image(self) -> dict[str, list[Saccade]]:
        out: dict[str, list[Saccade]] = {i: [] for i in self.images}
        for s in self.saccades:
            out[s.image_id].append(s)
        return out

    def labels(self) -> dict[str, EmotionClass]:
        return {i: r.emotion_class for i, r in self.images.items()}


def dataset_summary(trials: TrialSet) -> dict:
    """Fixation counts per emotion class, observer count and total gaze time.

    Gaze time is the summed fixation duration in milliseconds.
    """
    if not trials.images:
        raise GazeDomainError("empty TrialSet")
    labels = trials.labels()
    per_class = {c.label: 0 for c in EmotionClass}
    per_image = {i: 0 for i in trials.images}
    total_ms = 0.0
    for f in trials.fixations:
        per_class[labels[f.image_id].label] += 1
        per_image[f.image_id] += 1
        total_ms += f.duration
    images_per_class = {c.label: 0 for c in EmotionClass}
    for lab in labels.values():
        images_per_class[lab.label] += 1
    return {
        "total_fixations": len(trials.fixations),
        "fixations_per_class": per_class,
        "images_per_class": images_per_class,
        "n_images": len(trials.images),
        "n_observers": len(trials.observers),
        "n_saccades": len(trials.saccades),
        "total_gaze_time_ms": total_ms,
        "images_without_fixations": sorted(i for i, n in per_image.items() if n == 0),
    }


def fixation_array(fixations: Iterable[Fixation]) -> np.ndarray:
    """(n, 2) array of fixation centroids."""
    pts = [(f.x, f.y) for f in fixations]
    return np.asarray(pts, dtype=float).reshape(-1, 2)
