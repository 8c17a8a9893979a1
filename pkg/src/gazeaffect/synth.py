"""Synthetic gaze sessions with planted, class-conditional event statistics.

Every trial (one observer viewing one image) draws from its own generator,
seeded by hashing ``(seed, observer_id, image_id)``, so a trial's content
does not depend on which other trials are generated or in what order.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Sequence

import numpy as np

from .core import EmotionClass, Fixation, GazeSample, ImageRecord, TrialSet
from .events import DetectionParams
from .features.congruency import CenterBiasModel
from .ingest import write_fixation_log, write_gaze_log, write_metadata, write_observer_genders

# SAM ranges used to give each synthetic image a score inside its class
_SAM_RANGES = {
    EmotionClass.UNPLEASANT: (1.5, 3.5),
    EmotionClass.NEUTRAL: (4.2, 5.8),
    EmotionClass.PLEASANT: (6.5, 8.5),
}
SPATIAL_MODES = ("bias", "scanpath")
FAMILIES = ("lognormal", "gamma", "uniform")


def _check_family(family: str, params, what: str) -> None:
    if family not in FAMILIES:
        raise ValueError(f"{what} family must be one of {FAMILIES}, got {family!r}")
    a, b = params
    if family == "lognormal" and not b > 0:
        raise ValueError(f"{what}: log-normal sigma must be positive")
    if family == "gamma" and not (a > 0 and b > 0):
        raise ValueError(f"{what}: gamma shape and scale must be positive")
    if family == "uniform" and not 0 <= a < b:
        raise ValueError(f"{what}: uniform bounds need 0 <= low < high")


def draw(rng: np.random.Generator, family: str, params, size=None):
    """Positive draws from a two-parameter family.

    ``lognormal`` takes ``(mu, sigma)`` of the log, ``gamma`` takes
    ``(shape, scale)`` and ``uniform`` takes ``(low, high)``.
    """
    a, b = params
    if family == "lognormal":
        return np.exp(rng.normal(a, b, size))
    if family == "gamma":
        return rng.gamma(a, b, size)
    return rng.uniform(a, b, size)


@dataclass(frozen=True)
class ClassParams:
    """Event distributions for the images of one emotion class.

    Parameters
    ----------
    duration : (float, float)
        Fixation duration parameters in ms. With the default log-normal
        family these are ``(mu, sigma)`` with ``log(d) ~ N(mu, sigma**2)``.
    length : (float, float)
        Saccade length parameters in pixels. With the default gamma family
        these are ``(shape, scale)``, so the mean is ``shape * scale``.
    slope : (mean_deg, kappa)
        Axial von Mises orientation in [0, 180): twice the angle follows a
        von Mises with mean ``2 * mean_deg`` and concentration ``kappa``
        (``kappa = 0`` is uniform).
    bias : CenterBiasModel
        Fixation locations in normalized coordinates.
    fixations_per_trial : float
        Poisson mean of the number of fixations in a trial.
    duration_family, length_family : {"lognormal", "gamma", "uniform"}
        Distribution families for the two event measures (see :func:`draw`).
    """

    duration: tuple[float, float] = (5.5, 0.4)
    length: tuple[float, float] = (4.0, 37.5)
    slope: tuple[float, float] = (0.0, 0.0)
    bias: CenterBiasModel = CenterBiasModel((0.0, 0.0), (0.25, 0.25))
    fixations_per_trial: float = 12.0
    duration_family: str = "lognormal"
    length_family: str = "gamma"

    def __post_init__(self):
        _check_family(self.duration_family, self.duration, "duration")
        _check_family(self.length_family, self.length, "length")
        if not self.slope[1] >= 0:
            raise ValueError("von Mises kappa must be non-negative")
        if self.bias.degenerate:
            raise ValueError("spatial bias needs positive sigma on both axes")
        if not self.fixations_per_trial > 0:
            raise ValueError("Poisson mean must be positive")


@dataclass(frozen=True)
class SyntheticScenario:
    n_images: tuple[int, int, int] = (20, 20, 20)  # unpleasant, neutral, pleasant
    n_observers: int = 10
    classes: tuple[ClassParams, ClassParams, ClassParams] = (ClassParams(),) * 3
    seed: int = 0
    spatial_mode: str = "bias"
    image_size: tuple[int, int] = (1024, 768)
    female_fraction: float = 0.5
    # timeline settings
    sample_rate_hz: float = 60.0
    trial_ms: float = 5000.0
    jitter_px: float = 0.0
    min_step_px: float = 180.0

    def __post_init__(self):
        if len(self.n_images) != 3 or any(n < 0 for n in self.n_images) or sum(self.n_images) == 0:
            raise ValueError("n_images needs three non-negative counts, not all zero")
        if self.n_observers < 1:
            raise ValueError("need at least one observer")
        if len(self.classes) != 3:
            raise ValueError("need one ClassParams per emotion class")
        if self.spatial_mode not in SPATIAL_MODES:
            raise ValueError(f"spatial_mode must be one of {SPATIAL_MODES}")
        if not (self.sample_rate_hz > 0 and self.trial_ms > 0 and self.jitter_px >= 0):
            raise ValueError("invalid timeline settings")

    @classmethod
    def uniform(cls, **kwargs) -> "SyntheticScenario":
        """Scenario whose three classes share the default parameters."""
        return cls(**kwargs)

    def with_class_lengths(self, means: Sequence[float], shape: float = 4.0) -> "SyntheticScenario":
        """Copy with class-conditional gamma saccade-length means."""
        cls_params = tuple(replace(c, length=(shape, m / shape), length_family="gamma") for c, m in zip(self.classes, means))
        return replace(self, classes=cls_params)

    def image_ids(self) -> list[tuple[str, EmotionClass]]:
        out, k = [], 0
        for cls, n in zip(EmotionClass, self.n_images):
            for _ in range(n):
                out.append((f"img{k:04d}", cls))
                k += 1
        return out

    def observer_ids(self) -> list[str]:
        return [f"obs{k:03d}" for k in range(self.n_observers)]

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class TrialRecord:
    observer_id: str
    image_id: str
    emotion_class: int
    n_fixations: int
    n_saccades: int
    n_clamped: int = 0


@dataclass
class SynthLedger:
    """Ground truth behind a generated data set.

    ``planted`` maps class name to arrays of every drawn duration, length
    and slope, before any interaction with the image border.
    """

    scenario: dict
    trials: list[TrialRecord] = field(default_factory=list)
    planted: dict = field(default_factory=dict)

    @property
    def total_fixations(self) -> int:
        return sum(t.n_fixations for t in self.trials)

    def to_json(self) -> str:
        d = {
            "scenario": self.scenario,
            "trials": [asdict(t) for t in self.trials],
            "totals": {"fixations": self.total_fixations,
                       "saccades": sum(t.n_saccades for t in self.trials)},
        }
        return json.dumps(d, indent=2, sort_keys=True) + "\n"


def trial_rng(seed: int, observer_id: str, image_id: str) -> np.random.Generator:
    digest = hashlib.sha256(f"{seed}/{observer_id}/{image_id}".encode()).digest()
    return np.random.default_rng(np.frombuffer(digest, dtype=np.uint32))


def sample_slopes(rng: np.random.Generator, mean_deg: float, kappa: float, size) -> np.ndarray:
    if kappa == 0:
        return rng.uniform(0.0, 180.0, size)
    phi = rng.vonmises(math.radians(2.0 * mean_deg), kappa, size)
    return np.degrees(phi / 2.0) % 180.0


def _image_records(scen: SyntheticScenario) -> list[ImageRecord]:
    rng = np.random.default_rng([scen.seed, 0x1A6E])
    w, h = scen.image_size
    recs = []
    for iid, cls in scen.image_ids():
        lo, hi = _SAM_RANGES[cls]
        recs.append(ImageRecord(iid, round(float(rng.uniform(lo, hi)), 3), width=w, height=h))
    return recs


def _genders(scen: SyntheticScenario) -> dict[str, str]:
    obs = scen.observer_ids()
    n_f = int(round(scen.female_fraction * len(obs)))
    return {o: ("female" if k < n_f else "male") for k, o in enumerate(obs)}


def _to_pixels(z, size):
    return (np.asarray(z) + 1.0) * np.asarray(size, dtype=float) / 2.0


def _trial_fixations(rng, p: ClassParams, n: int, size, mode: str):
    """Positions, durations and planted saccades for one trial."""
    w, h = size
    durations = draw(rng, p.duration_family, p.duration, n)
    lengths = draw(rng, p.length_family, p.length, max(n - 1, 0))
    slopes = sample_slopes(rng, p.slope[0], p.slope[1], max(n - 1, 0))
    mu, sd = np.asarray(p.bias.mu), np.asarray(p.bias.sigma)
    if mode == "bias":
        pos = _to_pixels(rng.normal(mu, sd, (n, 2)), size)
        return pos, durations, lengths, slopes, 0
    pos = np.empty((n, 2))
    pos[0] = np.clip(_to_pixels(rng.normal(mu, sd), size), 0, [w - 1, h - 1])
    signs = rng.choice([-1.0, 1.0], max(n - 1, 0))
    n_clamped = 0
    for k in range(1, n):
        rad = math.radians(slopes[k - 1])
        step = signs[k - 1] * lengths[k - 1] * np.array([math.cos(rad), math.sin(rad)])
        nxt = pos[k - 1] + step
        if not (0 <= nxt[0] <= w - 1 and 0 <= nxt[1] <= h - 1):
            # reversing the step keeps both its length and its folded slope
            nxt = pos[k - 1] - step
        if not (0 <= nxt[0] <= w - 1 and 0 <= nxt[1] <= h - 1):
            nxt = np.clip(nxt, 0, [w - 1, h - 1])
            n_clamped += 1
        pos[k] = nxt
    return pos, durations, lengths, slopes, n_clamped


def generate(scenario: SyntheticScenario) -> tuple[TrialSet, SynthLedger]:
    """Draw a full fixation-level data set and its ground-truth ledger.

    Each trial draws a Poisson number of fixations (at least one) with
    durations from the class's duration family, separated by 30 ms gaps. In ``"bias"`` mode the
    locations are i.i.d. from the class's center-bias Gaussian; in
    ``"scanpath"`` mode only the first location is, and each following one
    is reached by a planted saccade (length family, axial von Mises slope,
    random direction). Steps that would leave the image are reversed, and
    clamped only when both directions leave it.
    """
    images = _image_records(scenario)
    ledger = SynthLedger(scenario.to_dict())
    planted = {c.label: {"duration": [], "length": [], "slope": []} for c in EmotionClass}
    fixations = []
    for rec in images:
        cls = rec.emotion_class
        p = scenario.classes[int(cls)]
        for obs in scenario.observer_ids():
            rng = trial_rng(scenario.seed, obs, rec.image_id)
            n = max(1, int(rng.poisson(p.fixations_per_trial)))
            pos, dur, lengths, slopes, n_clamped = _trial_fixations(rng, p, n, rec.size, scenario.spatial_mode)
            onset = 0.0
            for (x, y), d in zip(pos, dur):
                fixations.append(Fixation(obs, rec.image_id, float(x), float(y), round(onset, 6), float(d)))
                onset += float(d) + 30.0
            planted[cls.label]["duration"].append(dur)
            if scenario.spatial_mode == "scanpath":
                planted[cls.label]["length"].append(lengths)
                planted[cls.label]["slope"].append(slopes)
            ledger.trials.append(TrialRecord(obs, rec.image_id, int(cls), n, n - 1, n_clamped))
    ledger.planted = {c: {m: np.concatenate(v) if v else np.empty(0) for m, v in d.items()}
                      for c, d in planted.items()}
    trials = TrialSet.build(images, fixations, scenario.observer_ids(), _genders(scenario))
    return trials, ledger


@dataclass(frozen=True)
class PlantedFixation:
    observer_id: str
    image_id: str
    x: float
    y: float
    onset: float
    duration: float
    first_sample: int
    n_samples: int


def generate_trial_timeline(scenario: SyntheticScenario, detection: DetectionParams | None = None
                            ) -> tuple[list[GazeSample], list[PlantedFixation]]:
    """Raw gaze streams with planted fixations, for testing event detection.

    Each trial lasts ``trial_ms`` sampled at ``sample_rate_hz`` (300 samples
    for 5 s at 60 Hz). Fixations hold a planted location for a whole number
    of samples (log-normal duration, rounded, never shorter than the
    detector's minimum) and are joined by two-sample saccades placed at one
    and two thirds of the jump. Consecutive locations differ by at least
    ``min_step_px`` on one axis so saccade samples never fit inside a
    fixation's dispersion window. Gaussian jitter of ``jitter_px`` is added
    to every sample. A trailing fixation cut short below the minimum
    duration is not planted.
    """
    detection = detection or DetectionParams()
    dt = 1000.0 / scenario.sample_rate_hz
    n_samples = int(round(scenario.trial_ms / dt))
    min_len = int(math.ceil(detection.min_duration / dt - 1e-9))
    w, h = scenario.image_size
    samples, planted = [], []
    images = _image_records(scenario)
    for rec in images:
        p = scenario.classes[int(rec.emotion_class)]
        for obs in scenario.observer_ids():
            rng = trial_rng(scenario.seed, obs, rec.image_id)
            xs, ys = np.empty(n_samples), np.empty(n_samples)
            k, prev = 0, None
            while k < n_samples:
                while True:
                    c = np.clip(_to_pixels(rng.normal(p.bias.mu, p.bias.sigma), (w, h)), 0, [w - 1, h - 1])
                    if prev is None or np.max(np.abs(c - prev)) >= scenario.min_step_px:
                        break
                if prev is not None:
                    for frac in (1.0 / 3.0, 2.0 / 3.0):
                        if k < n_samples:
                            xs[k], ys[k] = prev + frac * (c - prev)
                            k += 1
                m = max(min_len, int(round(float(draw(rng, p.duration_family, p.duration)) / dt)))
                m_eff = min(m, n_samples - k)
                if m_eff <= 0:
                    break
                xs[k:k + m_eff], ys[k:k + m_eff] = c[0], c[1]
                if m_eff >= min_len:
                    planted.append(PlantedFixation(obs, rec.image_id, float(c[0]), float(c[1]),
                                                   k * dt, m_eff * dt, k, m_eff))
                k += m_eff
                prev = c
            if scenario.jitter_px > 0:
                xs += rng.normal(0.0, scenario.jitter_px, n_samples)
                ys += rng.normal(0.0, scenario.jitter_px, n_samples)
            samples.extend(GazeSample(obs, rec.image_id, j * dt, float(xs[j]), float(ys[j]))
                           for j in range(n_samples))
    return samples, planted


def write_dataset(directory, trials: TrialSet, ledger: SynthLedger | None = None,
                  samples: Sequence[GazeSample] | None = None, header_comment: str | None = None) -> Path:
    """Write a data set in the on-disk CSV layout read by the pipeline."""
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    write_metadata(d / "metadata.csv", trials.images.values())
    write_fixation_log(d / "fixations.csv", trials.fixations, header_comment)
    if trials.observer_gender:
        write_observer_genders(d / "observers.csv", trials.observer_gender)
    if samples is not None:
        write_gaze_log(d / "gaze.csv", samples, header_comment)
    if ledger is not None:
        (d / "ledger.json").write_text(ledger.to_json(), encoding="utf-8")
    return d
