from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence

from attack_tagger.taxonomy import AttackTaxonomy


@dataclass
class TacticTally:
    """
    In pair mode `correct` counts sentences whose tactic was among the predicted tactics
    and `pair_correct` those whose pairs under it were all predicted.
    """

    total: int = 0
    correct: int = 0
    pair_correct: Optional[int] = None

    @property
    def accuracy(self) -> float:
        return self.correct / self.total if self.total else 0.0

    @property
    def pair_accuracy(self) -> Optional[float]:
        if self.pair_correct is None:
            return None
        return self.pair_correct / self.total if self.total else 0.0

    def to_dict(self) -> Dict[str, Any]:
        doc: Dict[str, Any] = {"total": self.total, "correct": self.correct, "accuracy": self.accuracy}
        if self.pair_correct is not None:
            doc["pair_correct"] = self.pair_correct
            doc["pair_accuracy"] = self.pair_accuracy
        return doc


@dataclass
class EvalReport:
    """
    Aggregate of one evaluation. Pair mode fills the three *_correct counts;
    single-answer modes fill the F1 scores; LLM runs fill `failures`.
    """

    metric_name: str
    mode: str
    total_predictions: int = 0
    correct: int = 0
    per_tactic: Dict[str, TacticTally] = field(default_factory=dict)
    tactics_correct: Optional[int] = None
    techniques_correct: Optional[int] = None
    both_correct: Optional[int] = None
    f1_macro: Optional[float] = None
    f1_weighted: Optional[float] = None
    skipped: int = 0
    failures: Optional[int] = None
    sentences: int = 0

    @property
    def accuracy(self) -> float:
        return self.correct / self.total_predictions if self.total_predictions else 0.0

    @property
    def tactic_accuracy(self) -> Optional[float]:
        if self.tactics_correct is None or not self.total_predictions:
            return None
        return self.tactics_correct / self.total_predictions

    @property
    def technique_accuracy(self) -> Optional[float]:
        if self.techniques_correct is None or not self.total_predictions:
            return None
        return self.techniques_correct / self.total_predictions

    def credit(self, tactics: Sequence[str], correct: bool, pair_correct: Optional[bool] = None) -> None:
        for t in tactics:
            row = self.per_tactic.setdefault(t, TacticTally())
            row.total += 1
            row.correct += int(bool(correct))
            if pair_correct is not None:
                row.pair_correct = (row.pair_correct or 0) + int(bool(pair_correct))

    def to_dict(self) -> Dict[str, Any]:
        doc: Dict[str, Any] = {
            "metric_name": self.metric_name,
            "mode": self.mode,
            "total_predictions": self.total_predictions,
            "correct": self.correct,
            "accuracy": self.accuracy,
            "sentences": self.sentences,
            "skipped": self.skipped,
            "per_tactic": {t: self.per_tactic[t].to_dict() for t in sorted(self.per_tactic)},
        }
        if self.tactics_correct is not None:
            doc["tactics_correct"] = self.tactics_correct
            doc["techniques_correct"] = self.techniques_correct
            doc["both_correct"] = self.both_correct
            doc["tactic_accuracy"] = self.tactic_accuracy
            doc["technique_accuracy"] = self.technique_accuracy
        if self.f1_macro is not None:
            doc["f1_macro"] = self.f1_macro
            doc["f1_weighted"] = self.f1_weighted
        if self.failures is not None:
            doc["failures"] = self.failures
        return doc

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2, ensure_ascii=False)


def comparison_json(reports: Sequence[EvalReport], names: Sequence[str]) -> str:
    return json.dumps(
        {name: r.to_dict() for name, r in zip(names, reports)},
        sort_keys=True,
        indent=2,
        ensure_ascii=False,
    )


def _fmt(v: Any) -> str:
    if v is None:
        return "-"
    if isinstance(v, float):
        return f"{v:.4f}"
    return str(v)


def render_table(
    reports: Sequence[EvalReport],
    names: Optional[Sequence[str]] = None,
    taxonomy: Optional[AttackTaxonomy] = None,
) -> str:
    """
    Aligned text table, one value column per report.
    Summary rows first, then "Accuracy parsed by tactic", then pair accuracy by tactic for pair runs.
    """
    reports = list(reports)
    names = list(names) if names else [r.metric_name for r in reports]
    rows: List[List[str]] = []

    def add(label: str, getter) -> None:
        values = [getter(r) for r in reports]
        if all(v is None for v in values):
            return
        rows.append([label] + [_fmt(v) for v in values])

    add("Total predictions", lambda r: r.total_predictions)
    add("Tactics correct", lambda r: r.tactics_correct)
    add("Techniques correct", lambda r: r.techniques_correct)
    add("Both correct", lambda r: r.both_correct)
    add("Correct", lambda r: r.correct)
    add("Tactic accuracy", lambda r: r.tactic_accuracy)
    add("Technique accuracy", lambda r: r.technique_accuracy)
    add("Accuracy", lambda r: r.accuracy)
    add("F1 (macro)", lambda r: r.f1_macro)
    add("F1 (weighted)", lambda r: r.f1_weighted)
    add("Failures", lambda r: r.failures)
    add("Skipped", lambda r: r.skipped)

    tactics = sorted({t for r in reports for t in r.per_tactic})

    def tactic_block(getter) -> List[List[str]]:
        block: List[List[str]] = []
        for t in tactics:
            label = f"{t} {taxonomy.tactic_name(t)}" if taxonomy is not None else t
            block.append([label] + [_fmt(getter(r.per_tactic[t])) if t in r.per_tactic else "-" for r in reports])
        return block

    tactic_rows = tactic_block(lambda row: row.accuracy)
    pair_rows: List[List[str]] = []
    if any(row.pair_correct is not None for r in reports for row in r.per_tactic.values()):
        pair_rows = tactic_block(lambda row: row.pair_accuracy)

    header = ["", *names]
    body = rows + tactic_rows + pair_rows
    widths = [max(len(row[i]) for row in [header] + body) for i in range(len(header))]

    def line(row: List[str]) -> str:
        return "  ".join([row[0].ljust(widths[0])] + [c.rjust(w) for c, w in zip(row[1:], widths[1:])]).rstrip()

    out = [f"Metric: {reports[0].metric_name}   Mode: {reports[0].mode}" if reports else "", line(header)]
    out.append("-" * len(line(header)))
    out.extend(line(r) for r in rows)
    if tactic_rows:
        out.append("")
        out.append("Accuracy parsed by tactic")
        out.extend(line(r) for r in tactic_rows)
    if pair_rows:
        out.append("")
        out.append("Pair accuracy parsed by tactic")
        out.extend(line(r) for r in pair_rows)
    return "\n".join(out) + "\n"
