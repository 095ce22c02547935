from .accuracy import (
    intersection_count,
    macro_f1,
    multiclass_accuracy,
    pair_accuracy,
    subset_correct,
    top_n_subset_accuracy,
    weighted_f1,
)
from .report import EvalReport, TacticTally, comparison_json, render_table
from .evaluate import (
    ACCURACY,
    COMPATIBLE,
    INTERSECTION,
    METRICS,
    PAIR,
    SUBSET,
    check_metric,
    default_metric,
    evaluate_run,
    gt_pairs,
)

__all__ = [
    "intersection_count",
    "macro_f1",
    "multiclass_accuracy",
    "pair_accuracy",
    "subset_correct",
    "top_n_subset_accuracy",
    "weighted_f1",
    "EvalReport",
    "TacticTally",
    "comparison_json",
    "render_table",
    "ACCURACY",
    "COMPATIBLE",
    "INTERSECTION",
    "METRICS",
    "PAIR",
    "SUBSET",
    "check_metric",
    "default_metric",
    "evaluate_run",
    "gt_pairs",
]
