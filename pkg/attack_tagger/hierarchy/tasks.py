from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Any, Dict, Optional

from attack_tagger.errors import ValidationError
from attack_tagger.linear import RankedPrediction


class TaskKind(Enum):
    MULTICLASS_TACTIC = 1
    MULTICLASS_TECHNIQUE = 2
    MULTILABEL_TACTIC = 3
    MULTILABEL_TECHNIQUE = 4
    MIXED_MULTILABEL = 5
    MULTICLASS_HIERARCHICAL = 6
    MULTILABEL_HIERARCHICAL = 7


# CLI spelling of each task kind.
MODE_NAMES: Dict[str, TaskKind] = {
    "tactic": TaskKind.MULTICLASS_TACTIC,
    "technique": TaskKind.MULTICLASS_TECHNIQUE,
    "tactic-topn": TaskKind.MULTILABEL_TACTIC,
    "technique-topn": TaskKind.MULTILABEL_TECHNIQUE,
    "mixed-topn": TaskKind.MIXED_MULTILABEL,
    "pair": TaskKind.MULTICLASS_HIERARCHICAL,
    "pairs": TaskKind.MULTILABEL_HIERARCHICAL,
}

_SINGLE = (TaskKind.MULTICLASS_TACTIC, TaskKind.MULTICLASS_TECHNIQUE, TaskKind.MULTICLASS_HIERARCHICAL)
_FLAT = (TaskKind.MULTICLASS_TECHNIQUE, TaskKind.MULTILABEL_TECHNIQUE, TaskKind.MIXED_MULTILABEL)
_PAIRS = (TaskKind.MULTICLASS_HIERARCHICAL, TaskKind.MULTILABEL_HIERARCHICAL)


@dataclass(frozen=True)
class TaskMode:
    """
    Output shape of a prediction. Single-answer kinds always carry n = m = 1;
    `m` only matters for MULTILABEL_HIERARCHICAL.
    """

    kind: TaskKind
    n: int = 1
    m: int = 1

    def __post_init__(self):
        if int(self.n) < 1 or int(self.m) < 1:
            raise ValidationError(f"n and m must be >= 1, got n={self.n} m={self.m}")
        if self.kind in _SINGLE:
            object.__setattr__(self, "n", 1)
            object.__setattr__(self, "m", 1)
        elif self.kind != TaskKind.MULTILABEL_HIERARCHICAL:
            object.__setattr__(self, "m", 1)

    @classmethod
    def from_name(cls, name: str, n: int = 1, m: int = 1) -> "TaskMode":
        if name not in MODE_NAMES:
            raise ValidationError(f"Unknown mode {name!r}; expected one of {sorted(MODE_NAMES)}")
        return cls(MODE_NAMES[name], n, m)

    @property
    def name(self) -> str:
        return next(k for k, v in MODE_NAMES.items() if v == self.kind)

    @property
    def needs_flat_model(self) -> bool:
        return self.kind in _FLAT

    @property
    def is_pair_mode(self) -> bool:
        return self.kind in _PAIRS

    def describe(self) -> str:
        if self.kind == TaskKind.MULTILABEL_HIERARCHICAL:
            return f"{self.name} (n={self.n}, m={self.m})"
        if self.kind in _SINGLE:
            return self.name
        return f"{self.name} (n={self.n})"


@dataclass(frozen=True)
class TaskPrediction:
    """
    Whatever the mode produces; unused parts stay None.
    """

    mode: TaskMode
    tactics: Optional[RankedPrediction] = None
    techniques: Optional[RankedPrediction] = None
    pairs: Optional[Any] = None  # PairPrediction

    def labels(self) -> frozenset:
        out = set()
        if self.tactics is not None:
            out |= self.tactics.label_set
        if self.techniques is not None:
            out |= self.techniques.label_set
        if self.pairs is not None:
            for ta, te in self.pairs.flattened():
                out.add(ta)
                out.add(te)
        return frozenset(out)

    def to_dict(self) -> Dict[str, Any]:
        doc: Dict[str, Any] = {"mode": self.mode.name, "n": self.mode.n, "m": self.mode.m}
        if self.tactics is not None:
            doc["tactics"] = self.tactics.to_list()
        if self.techniques is not None:
            doc["techniques"] = self.techniques.to_list()
        if self.pairs is not None:
            doc["pairs"] = self.pairs.to_list()
        return doc

