"""One-way ANOVA with an F-distribution tail computed from the incomplete beta."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np

_EPS = 1e-16
_TINY = 1e-300


class DegenerateGroupsWarning(UserWarning):
    pass


def _beta_cf(a: float, b: float, x: float, max_iter: int = 10_000) -> float:
    """Continued fraction for the incomplete beta, evaluated by modified Lentz."""
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    d = 1.0 / (d if abs(d) > _TINY else _TINY)
    h = d
    for m in range(1, max_iter + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        d = 1.0 / (d if abs(d) > _TINY else _TINY)
        c = 1.0 + aa / c
        c = c if abs(c) > _TINY else _TINY
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        d = 1.0 / (d if abs(d) > _TINY else _TINY)
        c = 1.0 + aa / c
        c = c if abs(c) > _TINY else _TINY
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            return h
    raise ArithmeticError(f"incomplete beta continued fraction did not converge (a={a}, b={b}, x={x})")


def betainc_reg(a: float, b: float, x: float) -> float:
    """Regularized incomplete beta function I_x(a, b)."""
    if a <= 0 or b <= 0:
        raise ValueError("a and b must be positive")
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    log_front = (math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
                 + a * math.log(x) + b * math.log1p(-x))
    # the fraction converges fast below the mean; use the symmetry relation above it
    if x < (a + 1.0) / (a + b + 2.0):
        return math.exp(log_front) * _beta_cf(a, b, x) / a
    return 1.0 - math.exp(log_front) * _beta_cf(b, a, 1.0 - x) / b


def f_sf(f: float, df1: float, df2: float) -> float:
    """Survival function P(F > f) of the F distribution."""
    if df1 <= 0 or df2 <= 0:
        raise ValueError("degrees of freedom must be positive")
    if not f > 0:
        return 1.0
    if math.isinf(f):
        return 0.0
    return betainc_reg(df2 / 2.0, df1 / 2.0, df2 / (df2 + df1 * f))


@dataclass(frozen=True)
class AnovaResult:
    df_between: int
    df_within: int
    F: float
    p: float
    ss_between: float = 0.0
    ss_within: float = 0.0

    @property
    def ms_within(self) -> float:
        return self.ss_within / self.df_within


def _check_groups(groups) -> list[np.ndarray]:
    gs = [np.asarray(g, dtype=float).ravel() for g in groups]
    if len(gs) < 2:
        raise ValueError("need at least two groups")
    for k, g in enumerate(gs):
        if g.size < 2:
            raise ValueError(f"group {k} has {g.size} values; need at least 2")
        if not np.all(np.isfinite(g)):
            raise ValueError(f"group {k} contains non-finite values")
    return gs


def one_way_anova(groups: Sequence[Sequence[float]]) -> AnovaResult:
    """Between/within one-way analysis of variance.

    When every value in every group is identical the ratio is 0/0; it is then
    reported as ``F = 0, p = 1`` with a :class:`DegenerateGroupsWarning`.
    Zero within-group spread with distinct group means gives ``F = inf``.
    """
    gs = _check_groups(groups)
    k = len(gs)
    n_total = sum(g.size for g in gs)
    grand = np.concatenate(gs).mean()
    ss_b = float(sum(g.size * (g.mean() - grand) ** 2 for g in gs))
    ss_w = float(sum(((g - g.mean()) ** 2).sum() for g in gs))
    df_b, df_w = k - 1, n_total - k
    if ss_w == 0.0:
        if ss_b == 0.0:
            warnings.warn("all groups are constant and equal; F set to 0", DegenerateGroupsWarning,
                          stacklevel=2)
            return AnovaResult(df_b, df_w, 0.0, 1.0, ss_b, ss_w)
        return AnovaResult(df_b, df_w, math.inf, 0.0, ss_b, ss_w)
    F = (ss_b / df_b) / (ss_w / df_w)
    return AnovaResult(df_b, df_w, float(F), f_sf(F, df_b, df_w), ss_b, ss_w)
