"""Repeated, class-balanced cross-validation of one-vs-rest linear SVMs.

Reading of the 0.9/0.05/0.05 scheme used here: every repetition shuffles the
images into 10 stratified folds. Each fold's held-out tenth is split,
again stratified, into a test half and a validation half; the other nine
folds form the training split. The training split is rebalanced by
resampling minority classes with replacement up to the majority count, C is
picked on the validation half, and the test half is predicted.
"""

from __future__ import annotations

import copy
import json
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Mapping, Sequence

import numpy as np
from sklearn.exceptions import ConvergenceWarning
from sklearn.preprocessing import normalize

from ..core import CLASS_NAMES
from ..features.channels import FeatureChannel
from .significance import mcnemar_vs_chance, t_confidence_interval
from .svm import LinearSVM

C_GRID = (0.01, 0.1, 1.0, 10.0, 100.0)


class ProtocolError(ValueError):
    pass


@dataclass(frozen=True)
class CVProtocol:
    n_folds: int = 10
    repetitions: int = 20
    ratios: tuple[float, float, float] = (0.9, 0.05, 0.05)
    seed: int = 0
    balance: bool = True
    c_grid: tuple[float, ...] = C_GRID
    tol: float = 1e-4
    max_iter: int = 10_000

    def __post_init__(self):
        if abs(sum(self.ratios) - 1.0) > 1e-9:
            raise ValueError("train/val/test ratios must sum to 1")
        if self.n_folds < 2 or self.repetitions < 1:
            raise ValueError("need n_folds >= 2 and repetitions >= 1")
        if not self.c_grid or any(c <= 0 for c in self.c_grid):
            raise ValueError("c_grid must hold positive values")


class BalancedRepeatedSplit:
    """Splitter yielding ``(rep, fold, train, val, test)`` index arrays.

    ``train`` is already rebalanced (it may contain repeated indices when
    ``balance`` is on). Deterministic for a given ``seed``.
    """

    def __init__(self, n_folds=10, repetitions=20, seed=0, balance=True):
        self.n_folds = n_folds
        self.repetitions = repetitions
        self.seed = seed
        self.balance = balance

    def get_n_splits(self, X=None, y=None):
        return self.n_folds * self.repetitions

    def check(self, y):
        y = np.asarray(y)
        for cls in np.unique(y):
            n = int(np.sum(y == cls))
            if n < self.n_folds:
                name = CLASS_NAMES[cls] if 0 <= int(cls) < len(CLASS_NAMES) else str(cls)
                raise ProtocolError(f"class {name!r} has {n} samples; need at least {self.n_folds}")

    def repetition(self, y, rep):
        y = np.asarray(y)
        rng = np.random.default_rng([self.seed, rep])
        classes = np.unique(y)
        fold_of = np.empty(y.size, dtype=int)
        offset = 0
        for cls in classes:
            idx = rng.permutation(np.flatnonzero(y == cls))
            # continue the round-robin across classes so fold sizes stay even
            fold_of[idx] = (np.arange(idx.size) + offset) % self.n_folds
            offset += idx.size
        toggle = 0
        for fold in range(self.n_folds):
            held = np.flatnonzero(fold_of == fold)
            test, val = [], []
            for cls in classes:
                members = rng.permutation(held[y[held] == cls])
                for j, i in enumerate(members):
                    (test if (j + toggle) % 2 == 0 else val).append(i)
                toggle = (toggle + members.size) % 2
            train = np.flatnonzero(fold_of != fold)
            if self.balance:
                train = self._rebalance(train, y, rng)
            yield rep, fold, train, np.sort(np.array(val, dtype=int)), np.sort(np.array(test, dtype=int))

    @staticmethod
    def _rebalance(train, y, rng):
        parts = [train[y[train] == c] for c in np.unique(y[train])]
        target = max(p.size for p in parts)
        out = []
        for p in parts:
            extra = rng.choice(p, target - p.size, replace=True) if target > p.size else p[:0]
            out.append(np.concatenate([p, extra]))
        return np.concatenate(out)

    def split(self, X, y):
        self.check(y)
        for rep in range(self.repetitions):
            yield from self.repetition(y, rep)


@dataclass
class EvalReport:
    channels: list[str]
    confusion: list[list[float]]
    confusion_counts: list[list[int]]
    mean_accuracy: float
    ci95: tuple[float, float]
    mcnemar_p: float
    rep_accuracies: list[float]
    n_predictions: int
    n_images: int
    selected_c: dict[str, int]
    predictions: list[tuple[int, int, str, int, int]] = field(repr=False, default_factory=list)
    meta: dict = field(default_factory=dict)

    def to_dict(self, with_predictions=True) -> dict:
        d = asdict(self)
        d["ci95"] = list(self.ci95)
        d["predictions"] = [list(p) for p in self.predictions] if with_predictions else []
        return d

    def to_json(self, with_predictions=True) -> str:
        return json.dumps(self.to_dict(with_predictions), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "EvalReport":
        d = json.loads(text)
        d["ci95"] = tuple(d["ci95"])
        d["predictions"] = [tuple(p) for p in d["predictions"]]
        return cls(**d)

    def to_text(self) -> str:
        """Confusion matrix laid out as rows = actual, columns = predicted."""
        w = max(len(n) for n in CLASS_NAMES) + 2
        lines = [f"channels: {' + '.join(self.channels)}",
                 " " * w + "".join(f"{n:>{w}}" for n in CLASS_NAMES)]
        for name, row in zip(CLASS_NAMES, self.confusion):
            lines.append(f"{name:<{w}}" + "".join(f"{v:>{w}.1f}" for v in row))
        lo, hi = self.ci95
        lines.append(f"mA={self.mean_accuracy:.1f}% (p={self.mcnemar_p:.3g}, 95% CI={lo:.2f}--{hi:.2f}%)")
        return "\n".join(lines) + "\n"


def _as_label_array(labels, ids):
    if isinstance(labels, Mapping):
        return np.array([int(labels[i]) for i in ids], dtype=int)
    return np.asarray(labels, dtype=int)


def _prepare(channels, labels, image_ids=None):
    """Align channels on a common image order and attach labels."""
    if isinstance(channels, FeatureChannel) or isinstance(channels, np.ndarray):
        channels = [channels]
    mats, names = [], []
    if all(isinstance(c, FeatureChannel) for c in channels):
        sets = [set(c.image_ids) for c in channels]
        common = set.intersection(*sets)
        if any(s != common for s in sets):
            diff = sorted(set.union(*sets) - common)
            raise ProtocolError(f"channels cover different images; symmetric difference: {diff[:20]}")
        ids = [i for i in channels[0].image_ids if i in common]
        if isinstance(labels, Mapping):
            unlabeled = [i for i in ids if i not in labels]
            if unlabeled:
                raise ProtocolError(f"no labels for images {unlabeled[:10]}")
        for c in channels:
            X = c.align(ids).astype(float)
            if c.source == "visual":
                X = normalize(X, norm="l1")
            mats.append(X)
            names.append(c.name)
    else:
        mats = [np.asarray(c, dtype=float) for c in channels]
        ids = list(image_ids) if image_ids is not None else [str(k) for k in range(mats[0].shape[0])]
        names = [f"channel{k}" for k in range(len(mats))]
        if any(m.shape[0] != len(ids) for m in mats):
            raise ProtocolError("channel matrices differ in number of rows")
    y = _as_label_array(labels, ids)
    if y.size != len(ids):
        raise ProtocolError("label count does not match channel rows")
    return ids, mats, y, names


def _balanced_accuracy(y_true, y_pred) -> float:
    recalls = [np.mean(y_pred[y_true == c] == c) for c in np.unique(y_true)]
    return float(np.mean(recalls))


def _zscore_columns(S):
    mu = S.mean(axis=0)
    sd = S.std(axis=0)
    return (S - mu) / np.where(sd > 0, sd, 1.0)


def _fit_select(X, y, train, val, protocol):
    """Fit every C in the grid on ``train``, keep the best on ``val``.

    The grid is walked in increasing order with warm starts; ties on the
    validation score go to the smaller C. Returns the chosen model and the
    number of fits that stopped at ``max_iter``.
    """
    best, best_score, n_capped = None, -np.inf, 0
    m = LinearSVM(tol=protocol.tol, max_iter=protocol.max_iter, random_state=protocol.seed,
                  warm_start=True)
    Xt, yt = X[train], y[train]
    for C in sorted(protocol.c_grid):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", ConvergenceWarning)
            m.set_params(C=C).fit(Xt, yt)
        n_capped += int(np.any(m.n_iter_ >= protocol.max_iter))
        score = _balanced_accuracy(y[val], m.predict(X[val])) if val.size else 0.0
        if score > best_score:
            best, best_score = copy.deepcopy(m), score
    return best, n_capped


def _modal_predictions(img, y_true, y_pred, n_images, n_classes):
    """Per tested image, the most frequent predicted class over repetitions.

    Ties go to the lower class index. Returns ``(truth, prediction)`` for the
    images that were tested at least once, in image order.
    """
    votes = np.zeros((n_images, n_classes), dtype=int)
    np.add.at(votes, (img, y_pred), 1)
    truth = np.full(n_images, -1)
    truth[img] = y_true
    seen = votes.sum(axis=1) > 0
    return truth[seen], np.argmax(votes[seen], axis=1)


def _run_repetition(mats, y, protocol, splitter, rep, fuse):
    rows, chosen, capped = [], [], 0
    for _, fold, train, val, test in splitter.repetition(y, rep):
        if test.size == 0:
            continue
        scores = []
        for X in mats:
            m, n_capped = _fit_select(X, y, train, val, protocol)
            capped += n_capped
            chosen.append(m.C)
            S = m.decision_function(X[test])
            scores.append((m.classes_, _zscore_columns(S) if fuse else S))
        classes = scores[0][0]
        fused = np.mean([s for _, s in scores], axis=0)
        pred = classes[np.argmax(fused, axis=1)]
        rows.extend((rep, fold, int(i), int(y[i]), int(p)) for i, p in zip(test, pred))
    return rows, chosen, capped


def _evaluate(channels, labels, protocol, fuse, jobs=1, image_ids=None):
    ids, mats, y, names = _prepare(channels, labels, image_ids)
    splitter = BalancedRepeatedSplit(protocol.n_folds, protocol.repetitions, protocol.seed, protocol.balance)
    splitter.check(y)

    def work(rep):
        return _run_repetition(mats, y, protocol, splitter, rep, fuse)

    reps = range(protocol.repetitions)
    if jobs and jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as ex:
            results = list(ex.map(work, reps))
    else:
        results = [work(r) for r in reps]

    rows = [r for res, _, _ in results for r in res]
    chosen = [c for _, cs, _ in results for c in cs]
    capped = sum(n for _, _, n in results)
    if capped:
        warnings.warn(f"{capped} SVM fits stopped at max_iter={protocol.max_iter} before reaching "
                      f"tol={protocol.tol}", ConvergenceWarning, stacklevel=3)
    arr = np.array([(r[0], r[3], r[4]) for r in rows], dtype=int).reshape(-1, 3)
    k = len(CLASS_NAMES)
    counts = np.zeros((k, k), dtype=int)
    np.add.at(counts, (arr[:, 1], arr[:, 2]), 1)
    sums = counts.sum(axis=1, keepdims=True)
    conf = np.where(sums > 0, 100.0 * counts / np.where(sums > 0, sums, 1), 0.0)
    rep_acc = [100.0 * _balanced_accuracy(arr[arr[:, 0] == r, 1], arr[arr[:, 0] == r, 2])
               for r in reps]
    mA = float(np.mean(rep_acc))
    ci = t_confidence_interval(rep_acc)
    img = np.array([r[2] for r in rows], dtype=int)
    y_img, pred_img = _modal_predictions(img, arr[:, 1], arr[:, 2], len(ids), k)
    p = mcnemar_vs_chance(pred_img == y_img, seed=protocol.seed, y_true=y_img, n_classes=k)
    selected = {}
    for c in chosen:
        selected[repr(float(c))] = selected.get(repr(float(c)), 0) + 1
    return EvalReport(
        channels=names,
        confusion=[[float(v) for v in row] for row in conf],
        confusion_counts=counts.tolist(),
        mean_accuracy=mA,
        ci95=(float(ci[0]), float(ci[1])),
        mcnemar_p=float(p),
        rep_accuracies=[float(a) for a in rep_acc],
        n_predictions=len(rows),
        n_images=len(ids),
        selected_c=dict(sorted(selected.items())),
        predictions=[(r[0], r[1], ids[r[2]], r[3], r[4]) for r in rows],
        meta={"protocol": {**asdict(protocol), "c_grid": list(protocol.c_grid),
                           "ratios": list(protocol.ratios)},
              "fusion": "zscore-mean" if fuse else "none",
              "fits_at_max_iter": capped},
    )


def run_protocol(channel, labels, protocol: CVProtocol | None = None, jobs: int = 1,
                 image_ids=None) -> EvalReport:
    """Evaluate one feature channel under the repeated balanced CV protocol.

    Parameters
    ----------
    channel : FeatureChannel or ndarray of shape (n, d)
    labels : mapping image_id -> class, or int array aligned with ``channel``
    protocol : CVProtocol
    jobs : int
        Worker threads over repetitions; results do not depend on it.

    Notes
    -----
    ``mean_accuracy`` is the balanced (per-class mean) accuracy averaged over
    repetitions. ``mcnemar_p`` compares the classifier with a seeded chance
    predictor on one prediction per image: the modal class over all
    repetitions in which the image was tested. Pooling every repetition would
    count each image many times and overstate significance.
    """
    return _evaluate(channel, labels, protocol or CVProtocol(), fuse=False, jobs=jobs, image_ids=image_ids)


def late_fuse(channels: Sequence, labels, protocol: CVProtocol | None = None, jobs: int = 1,
              image_ids=None) -> EvalReport:
    """Late fusion of several channels over one shared fold structure.

    Each channel gets its own model (C chosen on its validation split). Per
    test split, each class's decision scores are z-normalized across the
    test items, the normalized scores are averaged over channels and the
    argmax is taken. A single channel is accepted and gives the z-scored
    single-channel run, which fusing that channel with copies of itself
    reproduces exactly.
    """
    if isinstance(channels, (FeatureChannel, np.ndarray)) or len(channels) < 1:
        raise ProtocolError("late_fuse needs a sequence of channels")
    return _evaluate(list(channels), labels, protocol or CVProtocol(), fuse=True, jobs=jobs,
                     image_ids=image_ids)


def chance_level(n_classes: int = 3) -> float:
    return 100.0 / n_classes


def accuracy_summary(report: EvalReport) -> str:
    lo, hi = report.ci95
    return f"mA={report.mean_accuracy:.1f}% CI=[{lo:.2f}, {hi:.2f}] p={report.mcnemar_p:.3g}"
