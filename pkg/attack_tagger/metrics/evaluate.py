from __future__ import annotations

import logging
from typing import Dict, FrozenSet, List, Optional, Set, Tuple

from attack_tagger.corpus import Corpus, LabeledSentence
from attack_tagger.errors import EmptyTestSet, IncompatibleMetric
from attack_tagger.hierarchy import (
    HierarchicalModel,
    TaskKind,
    TaskMode,
    TaskPrediction,
    predict_task_vector,
)
from attack_tagger.metrics.accuracy import (
    intersection_count,
    macro_f1,
    pair_accuracy,
    subset_correct,
    weighted_f1,
)
from attack_tagger.metrics.report import EvalReport
from attack_tagger.taxonomy import AttackTaxonomy

logger = logging.getLogger("attack_tagger.metrics")

ACCURACY = "accuracy"
SUBSET = "subset"
INTERSECTION = "intersection"
PAIR = "pair"
METRICS = (ACCURACY, SUBSET, INTERSECTION, PAIR)

# Which metrics each task kind can be scored with; the first one is the default.
COMPATIBLE: Dict[TaskKind, Tuple[str, ...]] = {
    TaskKind.MULTICLASS_TACTIC: (ACCURACY, SUBSET, INTERSECTION),
    TaskKind.MULTICLASS_TECHNIQUE: (ACCURACY, SUBSET),
    TaskKind.MULTILABEL_TACTIC: (SUBSET, INTERSECTION),
    TaskKind.MULTILABEL_TECHNIQUE: (SUBSET,),
    TaskKind.MIXED_MULTILABEL: (SUBSET,),
    TaskKind.MULTICLASS_HIERARCHICAL: (PAIR,),
    TaskKind.MULTILABEL_HIERARCHICAL: (PAIR,),
}


def default_metric(mode: TaskMode) -> str:
    return COMPATIBLE[mode.kind][0]


def check_metric(mode: TaskMode, metric: str) -> None:
    if metric not in COMPATIBLE[mode.kind]:
        raise IncompatibleMetric(
            f"metric {metric!r} does not apply to mode {mode.name}; use one of {list(COMPATIBLE[mode.kind])}"
        )


def gt_pairs(sentence: LabeledSentence, taxonomy: AttackTaxonomy) -> Set[Tuple[str, str]]:
    return {
        (ta, te)
        for ta in sentence.tactic_labels
        for te in sentence.technique_labels
        if taxonomy.validate_pair(ta, te)
    }


def _gt_labels(sentence: LabeledSentence, kind: TaskKind) -> FrozenSet[str]:
    if kind in (TaskKind.MULTICLASS_TECHNIQUE, TaskKind.MULTILABEL_TECHNIQUE):
        return frozenset(sentence.technique_labels)
    if kind == TaskKind.MIXED_MULTILABEL:
        return frozenset(sentence.tactic_labels) | frozenset(sentence.technique_labels)
    return frozenset(sentence.tactic_labels)


def _predicted(pred: TaskPrediction) -> List[str]:
    if pred.tactics is not None and pred.techniques is None:
        return pred.tactics.labels
    if pred.techniques is not None and pred.tactics is None:
        return pred.techniques.labels
    return sorted(pred.labels())


def evaluate_run(
    h: HierarchicalModel,
    test: Corpus,
    mode: TaskMode,
    metric: Optional[str] = None,
) -> EvalReport:
    """
    Score `h` on every evaluable sentence of `test`.

    Sentences without tactic labels are skipped, as are sentences without the labels the mode
    scores (techniques for technique modes, a taxonomy-valid pair for pair modes).
    Per-tactic rows credit each sentence to every ground-truth tactic it carries. In pair mode a
    row counts the tactic as correct when it is among the predicted tactics and separately tracks
    whether the pairs under it were all predicted.
    """
    metric = metric or default_metric(mode)
    check_metric(mode, metric)
    kind = mode.kind
    report = EvalReport(metric_name=metric, mode=mode.describe())
    if mode.is_pair_mode:
        report.tactics_correct = 0
        report.techniques_correct = 0
        report.both_correct = 0

    top1_gt: List[str] = []
    top1_pred: List[str] = []
    for sentence in test.sentences:
        if sentence.is_unlabeled:
            report.skipped += 1
            continue

        if metric == PAIR:
            pairs = gt_pairs(sentence, h.taxonomy)
            if not pairs:
                report.skipped += 1
                continue
            pred = predict_task_vector(h, h.vectorize(sentence.text), mode)
            predicted_tactics = set(pred.pairs.tactics)
            tactics_ok = all(ta in predicted_tactics for ta, _ in pairs)
            techniques_ok = all(te in pred.pairs.techniques_under(ta) for ta, te in pairs)
            both_ok = all(pair_accuracy(p, pred.pairs) for p in pairs)
            report.total_predictions += 1
            report.correct += int(both_ok)
            report.tactics_correct += int(tactics_ok)
            report.techniques_correct += int(techniques_ok)
            report.both_correct += int(both_ok)
            for ta in sorted({ta for ta, _ in pairs}):
                pair_ok = all(pair_accuracy(p, pred.pairs) for p in pairs if p[0] == ta)
                report.credit([ta], ta in predicted_tactics, pair_ok)
            report.sentences += 1
            continue

        gt = _gt_labels(sentence, kind)
        if not gt:
            report.skipped += 1
            continue
        pred = predict_task_vector(h, h.vectorize(sentence.text), mode)
        labels = _predicted(pred)
        report.sentences += 1

        if metric == INTERSECTION:
            ranking = pred.tactics
            report.total_predictions += len(gt)
            report.correct += intersection_count(gt, ranking)
            for ta in sorted(gt):
                report.credit([ta], ta in ranking.label_set)
            continue

        if metric == ACCURACY:
            ok = labels[0] == min(gt)
        else:
            ok = subset_correct(gt, set(labels))
        report.total_predictions += 1
        report.correct += int(ok)
        report.credit(sorted(sentence.tactic_labels), ok)
        if kind in (TaskKind.MULTICLASS_TACTIC, TaskKind.MULTICLASS_TECHNIQUE):
            top1_gt.append(min(gt))
            top1_pred.append(labels[0])

    if report.total_predictions == 0:
        raise EmptyTestSet(f"No evaluable sentence in the test set ({report.skipped} skipped)")
    if report.skipped:
        logger.warning("skipped %s sentences without the labels mode %s scores", report.skipped, mode.name)
    if top1_gt:
        report.f1_macro = macro_f1(top1_gt, top1_pred)
        report.f1_weighted = weighted_f1(top1_gt, top1_pred)
    logger.info(
        "evaluated %s sentences: %s/%s correct (%s)",
        report.sentences,
        report.correct,
        report.total_predictions,
        metric,
    )
    return report
