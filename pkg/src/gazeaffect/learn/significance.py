"""McNemar test against a chance-level baseline and t-based confidence intervals."""

from __future__ import annotations

import math

import numpy as np
from scipy import stats as _st

EXACT_BELOW = 25


def mcnemar_test(b: int, c: int, exact: bool | None = None) -> tuple[float, float]:
    """McNemar test on the discordant counts ``b`` and ``c``.

    Uses the two-sided exact binomial test when ``b + c < 25`` (or
    ``exact=True``), otherwise the chi-square statistic with continuity
    correction. Returns ``(statistic, p)``; the statistic is ``min(b, c)``
    for the exact test.
    """
    b, c = int(b), int(c)
    n = b + c
    if n == 0:
        return 0.0, 1.0
    if exact or (exact is None and n < EXACT_BELOW):
        k = min(b, c)
        tail = sum(math.comb(n, i) for i in range(k + 1)) / 2.0**n
        return float(k), min(1.0, 2.0 * tail)
    stat = (abs(b - c) - 1.0) ** 2 / n
    return stat, math.erfc(math.sqrt(stat / 2.0))


def mcnemar_vs_chance(model_correct, seed: int = 0, y_true=None, n_classes: int = 3) -> float:
    """p-value of the model's correctness against a seeded random-label baseline.

    The baseline predicts a uniformly random class for every item. With
    ``y_true`` given it is scored against the real labels; otherwise it is
    scored against class 0, which has the same 1/n_classes hit rate.
    """
    mc = np.asarray(model_correct, dtype=bool).ravel()
    if mc.size == 0:
        raise ValueError("need at least one test item")
    rng = np.random.default_rng(seed)
    guess = rng.integers(0, n_classes, mc.size)
    truth = np.zeros(mc.size, dtype=int) if y_true is None else np.asarray(y_true).ravel()
    bc = guess == truth
    b = int(np.sum(mc & ~bc))
    c = int(np.sum(~mc & bc))
    return mcnemar_test(b, c)[1]


def t_confidence_interval(values, level: float = 0.95) -> tuple[float, float]:
    """Student-t interval for the mean of ``values``; degenerate for n < 2."""
    v = np.asarray(values, dtype=float)
    m = float(v.mean())
    if v.size < 2:
        return (m, m)
    half = float(_st.t.ppf(0.5 + level / 2.0, v.size - 1)) * float(v.std(ddof=1)) / math.sqrt(v.size)
    return (m - half, m + half)
