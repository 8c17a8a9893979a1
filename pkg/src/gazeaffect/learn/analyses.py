"""Experiments built on the protocol: observer-count sweeps and classeme analysis."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from ..core import CLASS_NAMES, TrialSet
from ..features.channels import FeatureChannel, FeatureParams, build_channel
from .protocol import CVProtocol, EvalReport, ProtocolError, run_protocol
from .significance import t_confidence_interval


@dataclass(frozen=True)
class SweepPoint:
    n_observers: int
    mean_accuracy: float
    ci95: tuple[float, float]
    draws: tuple[tuple[str, ...], ...]
    draw_accuracies: tuple[float, ...]


def observer_sweep(trials: TrialSet, protocol: CVProtocol | None = None, n_values: Sequence[int] = (),
                   draws: int = 3, params: FeatureParams | None = None, labels=None,
                   jobs: int = 1) -> list[SweepPoint]:
    """Accuracy of the density-map channel as a function of observer count.

    For every ``n`` in ``n_values``, ``draws`` observer subsets of size ``n``
    are sampled (seeded by ``protocol.seed`` and ``n``), the FDM channel is
    rebuilt from those observers only and the protocol is run on it. The
    point's accuracy is the mean over draws, and its interval is the t
    interval over all repetition accuracies of all draws. When ``n`` equals
    the number of observers a single draw with everyone is used, so that
    point reproduces the plain FDM run.
    """
    protocol = protocol or CVProtocol()
    labels = trials.labels() if labels is None else labels
    observers = sorted(trials.observers)
    out = []
    for n in n_values:
        if not 1 <= n <= len(observers):
            raise ValueError(f"n_observers={n} outside [1, {len(observers)}]")
        if n == len(observers):
            subsets = [tuple(observers)]
        else:
            rng = np.random.default_rng([protocol.seed, n])
            subsets = [tuple(sorted(rng.choice(observers, n, replace=False).tolist()))
                       for _ in range(draws)]
        accs, rep_accs = [], []
        for sub in subsets:
            ch = build_channel(trials, "fdm", params, observers=None if len(sub) == len(observers) else sub)
            report = run_protocol(ch, labels, protocol, jobs=jobs)
            accs.append(report.mean_accuracy)
            rep_accs.extend(report.rep_accuracies)
        lo, hi = t_confidence_interval(rep_accs)
        out.append(SweepPoint(n, float(np.mean(accs)), (lo, hi), tuple(subsets), tuple(accs)))
    return out


def sweep_table(points: Sequence[SweepPoint]) -> str:
    """CSV with one row per observer count, ready for plotting."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["n_observers", "mean_accuracy", "ci_lo", "ci_hi", "n_draws"])
    for p in points:
        w.writerow([p.n_observers, repr(p.mean_accuracy), repr(p.ci95[0]), repr(p.ci95[1]), len(p.draws)])
    return buf.getvalue()


@dataclass(frozen=True)
class CooccurrenceRow:
    visual_class: int
    n_images: int
    fractions: tuple[float, float, float]  # unpleasant, neutral, pleasant
    pleasantness: float


def classeme_cooccurrence(channel: FeatureChannel, labels: Mapping, pleasantness: Mapping | None = None
                          ) -> list[CooccurrenceRow]:
    """Visual class (argmax classeme) against emotion class.

    Each row holds, for one visual class that wins the argmax on at least one
    image, the fraction of those images in each emotion class. Rows are
    sorted by the mean pleasantness of their images (the SAM mean when
    ``pleasantness`` is given, the class index otherwise), then by class.
    """
    winners = np.argmax(channel.X, axis=1)
    k = len(CLASS_NAMES)
    groups: dict[int, list[str]] = {}
    for iid, v in zip(channel.image_ids, winners):
        groups.setdefault(int(v), []).append(iid)
    rows = []
    for v, ids in groups.items():
        counts = np.bincount([int(labels[i]) for i in ids], minlength=k)
        score = [float(pleasantness[i]) if pleasantness is not None else float(int(labels[i])) for i in ids]
        rows.append(CooccurrenceRow(v, len(ids), tuple(float(c) for c in counts / counts.sum()),
                                    float(np.mean(score))))
    rows.sort(key=lambda r: (r.pleasantness, r.visual_class))
    return rows


def cooccurrence_table(rows: Sequence[CooccurrenceRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["visual_class", "n_images", *CLASS_NAMES, "pleasantness_mean"])
    for r in rows:
        w.writerow([r.visual_class, r.n_images, *(repr(f) for f in r.fractions), repr(r.pleasantness)])
    return buf.getvalue()


def classeme_analysis(channel: FeatureChannel, labels: Mapping, protocol: CVProtocol | None = None,
                      pleasantness: Mapping | None = None, expected_dim: int | None = 1000,
                      jobs: int = 1) -> tuple[EvalReport, list[CooccurrenceRow]]:
    """Protocol run on classeme scores plus the visual-class co-occurrence table.

    Parameters
    ----------
    channel : FeatureChannel
        Per-image object-category scores.
    labels : mapping image_id -> emotion class
    expected_dim : int or None
        Required channel dimension; ``None`` skips the check.
    """
    if expected_dim is not None and channel.dimension != expected_dim:
        raise ProtocolError(f"classeme channel has dimension {channel.dimension}, expected {expected_dim}")
    report = run_protocol(channel, labels, protocol, jobs=jobs)
    return report, classeme_cooccurrence(channel, labels, pleasantness)
