from __future__ import annotations

from typing import AbstractSet, Sequence, Tuple

from sklearn.metrics import accuracy_score, f1_score

from attack_tagger.errors import EmptyTestSet, LengthMismatch
from attack_tagger.hierarchy import PairPrediction
from attack_tagger.linear import RankedPrediction


def _check(gt: Sequence[str], pred: Sequence[str]) -> None:
    if len(gt) != len(pred):
        raise LengthMismatch(f"{len(gt)} ground-truth labels but {len(pred)} predictions")
    if not gt:
        raise EmptyTestSet("No labels to score")


def multiclass_accuracy(gt: Sequence[str], pred: Sequence[str]) -> float:
    _check(gt, pred)
    return float(accuracy_score(list(gt), list(pred)))


def _f1(gt: Sequence[str], pred: Sequence[str], average: str) -> float:
    _check(gt, pred)
    # Only classes present in the ground truth are averaged; F1 is 0 when precision + recall is 0.
    return float(f1_score(list(gt), list(pred), labels=sorted(set(gt)), average=average, zero_division=0))


def macro_f1(gt: Sequence[str], pred: Sequence[str]) -> float:
    return _f1(gt, pred, "macro")


def weighted_f1(gt: Sequence[str], pred: Sequence[str]) -> float:
    return _f1(gt, pred, "weighted")


def top_n_subset_accuracy(gt_tactic: str, pred: RankedPrediction) -> bool:
    return gt_tactic in pred.label_set


def subset_correct(gt: AbstractSet[str], predicted: AbstractSet[str]) -> bool:
    return bool(gt) and set(gt) <= set(predicted)


def pair_accuracy(gt: Tuple[str, str], pred: PairPrediction) -> bool:
    return tuple(gt) in set(pred.flattened())


def intersection_count(gt_tactics: AbstractSet[str], pred: RankedPrediction) -> int:
    return len(set(gt_tactics) & pred.label_set)
