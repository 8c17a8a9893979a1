from .anova import AnovaResult, DegenerateGroupsWarning, betainc_reg, f_sf, one_way_anova
from .summary import (
    GROUPINGS,
    MEASURES,
    BoxStats,
    GroupedSummary,
    GroupStats,
    MissingMetadata,
    box_stats,
    grouped_summary,
    per_image_means,
)
from .tukey import PairComparison, TukeyResult, q_critical, tukey_kramer

__all__ = [
    "AnovaResult",
    "BoxStats",
    "DegenerateGroupsWarning",
    "GROUPINGS",
    "GroupStats",
    "GroupedSummary",
    "MEASURES",
    "MissingMetadata",
    "PairComparison",
    "TukeyResult",
    "betainc_reg",
    "box_stats",
    "f_sf",
    "grouped_summary",
    "one_way_anova",
    "per_image_means",
    "q_critical",
    "tukey_kramer",
]
