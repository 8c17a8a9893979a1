"""Tukey-Kramer pairwise comparisons at the 5% level."""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations
from typing import Sequence


from .anova import _check_groups, one_way_anova

# Upper 5% points of the studentized range q(k, df), k = 2..10.
_K_MAX = 10
_Q05 = {
    1: (17.9693, 26.9755, 32.8187, 37.0815, 40.4076, 43.1186, 45.3973, 47.3566, 49.0710),
    2: (6.0849, 8.3308, 9.7980, 10.8811, 11.7343, 12.4349, 13.0273, 13.5390, 13.9885),
    3: (4.5007, 5.9096, 6.8245, 7.5017, 8.0371, 8.4783, 8.8525, 9.1766, 9.4620),
    4: (3.9265, 5.0402, 5.7571, 6.2870, 6.7064, 7.0526, 7.3465, 7.6015, 7.8263),
    5: (3.6354, 4.6017, 5.2183, 5.6731, 6.0329, 6.3299, 6.5823, 6.8014, 6.9947),
    6: (3.4605, 4.3392, 4.8956, 5.3049, 5.6284, 5.8953, 6.1222, 6.3192, 6.4931),
    7: (3.3441, 4.1649, 4.6813, 5.0601, 5.3591, 5.6057, 5.8153, 5.9973, 6.1579),
    8: (3.2612, 4.0410, 4.5288, 4.8858, 5.1672, 5.3991, 5.5962, 5.7673, 5.9183),
    9: (3.1992, 3.9485, 4.4149, 4.7554, 5.0235, 5.2444, 5.4319, 5.5947, 5.7384),
    10: (3.1511, 3.8768, 4.3266, 4.6543, 4.9120, 5.1242, 5.3042, 5.4605, 5.5984),
    11: (3.1127, 3.8196, 4.2561, 4.5736, 4.8230, 5.0281, 5.2021, 5.3531, 5.4863),
    12: (3.0813, 3.7729, 4.1987, 4.5077, 4.7502, 4.9496, 5.1187, 5.2653, 5.3946),
    13: (3.0552, 3.7341, 4.1509, 4.4529, 4.6897, 4.8842, 5.0491, 5.1921, 5.3181),
    14: (3.0332, 3.7014, 4.1105, 4.4066, 4.6385, 4.8290, 4.9903, 5.1301, 5.2534),
    15: (3.0143, 3.6734, 4.0760, 4.3670, 4.5947, 4.7816, 4.9399, 5.0770, 5.1979),
    16: (2.9980, 3.6491, 4.0461, 4.3327, 4.5568, 4.7406, 4.8962, 5.0310, 5.1498),
    17: (2.9837, 3.6280, 4.0200, 4.3027, 4.5237, 4.7048, 4.8580, 4.9907, 5.1077),
    18: (2.9712, 3.6093, 3.9970, 4.2763, 4.4944, 4.6731, 4.8243, 4.9552, 5.0705),
    19: (2.9600, 3.5927, 3.9766, 4.2528, 4.4685, 4.6450, 4.7944, 4.9236, 5.0375),
    20: (2.9500, 3.5779, 3.9583, 4.2319, 4.4452, 4.6199, 4.7676, 4.8954, 5.0079),
    24: (2.9188, 3.5317, 3.9013, 4.1663, 4.3727, 4.5413, 4.6838, 4.8069, 4.9152),
    30: (2.8882, 3.4864, 3.8454, 4.1021, 4.3015, 4.4642, 4.6014, 4.7199, 4.8241),
    40: (2.8582, 3.4421, 3.7907, 4.0391, 4.2316, 4.3885, 4.5205, 4.6345, 4.7345),
    60: (2.8288, 3.3987, 3.7371, 3.9774, 4.1632, 4.3141, 4.4411, 4.5504, 4.6463),
    120: (2.8000, 3.3561, 3.6846, 3.9169, 4.0960, 4.2412, 4.3630, 4.4678, 4.5595),
    math.inf: (2.7718, 3.3145, 3.6332, 3.8577, 4.0301, 4.1696, 4.2863, 4.3865, 4.4741),
}
_DF_ROWS = sorted(_Q05)


def q_critical(k: int, df: float) -> float:
    """5% critical value of the studentized range for ``k`` means and ``df``.

    Linear interpolation between tabulated df rows; beyond 120 the
    interpolation runs in ``1/df`` towards the asymptotic row.
    """
    if not 2 <= k <= _K_MAX:
        raise ValueError(f"critical values are tabulated for 2 <= k <= {_K_MAX}, got k={k}")
    if df < 1:
        raise ValueError("df must be at least 1")
    col = k - 2
    if df in _Q05:
        return _Q05[df][col]
    hi = next(r for r in _DF_ROWS if r > df)
    lo = _DF_ROWS[_DF_ROWS.index(hi) - 1]
    q_lo, q_hi = _Q05[lo][col], _Q05[hi][col]
    if math.isinf(hi):
        frac = (1.0 / lo - 1.0 / df) / (1.0 / lo)
    else:
        frac = (df - lo) / (hi - lo)
    return q_lo + frac * (q_hi - q_lo)


@dataclass(frozen=True)
class PairComparison:
    group_a: int
    group_b: int
    mean_diff: float
    q: float
    significant: bool
    min_significant_diff: float


@dataclass(frozen=True)
class TukeyResult:
    pairs: tuple[PairComparison, ...]
    q_crit: float
    df_within: int

    def significant_pairs(self) -> list[tuple[int, int]]:
        return [(p.group_a, p.group_b) for p in self.pairs if p.significant]


def tukey_kramer(groups: Sequence[Sequence[float]]) -> TukeyResult:
    """Pairwise mean comparisons with the unequal-n Tukey-Kramer error.

    ``mean_diff`` is ``mean(b) - mean(a)`` for ``a < b``; a pair is
    significant when ``q = |mean_diff| / sqrt(MSE / 2 * (1/n_a + 1/n_b))``
    exceeds the 5% studentized-range critical value.
    """
    gs = _check_groups(groups)
    res = one_way_anova(gs)
    k = len(gs)
    qc = q_critical(k, res.df_within)
    mse = res.ms_within
    pairs = []
    for a, b in combinations(range(k), 2):
        diff = float(gs[b].mean() - gs[a].mean())
        se = math.sqrt(mse / 2.0 * (1.0 / gs[a].size + 1.0 / gs[b].size))
        if se > 0:
            q = abs(diff) / se
        else:
            q = 0.0 if diff == 0 else math.inf
        pairs.append(PairComparison(a, b, diff, q, bool(q > qc), qc * se))
    return TukeyResult(tuple(pairs), qc, res.df_within)
