from .analyses import (
    CooccurrenceRow,
    SweepPoint,
    classeme_analysis,
    classeme_cooccurrence,
    cooccurrence_table,
    observer_sweep,
    sweep_table,
)
from .protocol import (
    C_GRID,
    BalancedRepeatedSplit,
    CVProtocol,
    EvalReport,
    ProtocolError,
    accuracy_summary,
    chance_level,
    late_fuse,
    run_protocol,
)
from .significance import mcnemar_test, mcnemar_vs_chance, t_confidence_interval
from .svm import LinearSVM, NonSeparableWarning, train_linear_svm

__all__ = [
    "BalancedRepeatedSplit",
    "C_GRID",
    "CVProtocol",
    "CooccurrenceRow",
    "EvalReport",
    "LinearSVM",
    "NonSeparableWarning",
    "ProtocolError",
    "SweepPoint",
    "accuracy_summary",
    "chance_level",
    "classeme_analysis",
    "classeme_cooccurrence",
    "cooccurrence_table",
    "late_fuse",
    "mcnemar_test",
    "mcnemar_vs_chance",
    "observer_sweep",
    "run_protocol",
    "sweep_table",
    "t_confidence_interval",
]
