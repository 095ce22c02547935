from __future__ import annotations

from dataclasses import dataclass, field
from typing import FrozenSet, Mapping, Optional, Tuple

from attack_tagger.errors import ValidationError
from attack_tagger.taxonomy import TacticId, TechniqueId

MAX_SEED = 2**64 - 1


@dataclass(frozen=True)
class LabeledSentence:
    """
    One document D with its gold labels. Either label set may be empty or hold several ids.
    """

    text: str
    tactic_labels: FrozenSet[TacticId] = frozenset()
    technique_labels: FrozenSet[TechniqueId] = frozenset()
    source: str = "unknown"

    def __post_init__(self):
        if not str(self.text or "").strip():
            raise ValidationError("Sentence text is empty")

    @property
    def is_unlabeled(self) -> bool:
        return not self.tactic_labels

    @property
    def has_orphan_techniques(self) -> bool:
        return bool(self.technique_labels) and not self.tactic_labels

    @property
    def primary_tactic(self) -> Optional[TacticId]:
        return min(self.tactic_labels) if self.tactic_labels else None


@dataclass(frozen=True)
class Corpus:
    sentences: Tuple[LabeledSentence, ...]
    taxonomy_version: str = ""

    def __len__(self) -> int:
        return len(self.sentences)

    def __iter__(self):
        return iter(self.sentences)

    def texts(self) -> list[str]:
        return [s.text for s in self.sentences]

    def labeled(self) -> "Corpus":
        return Corpus(tuple(s for s in self.sentences if not s.is_unlabeled), self.taxonomy_version)

    def unlabeled_count(self) -> int:
        return sum(1 for s in self.sentences if s.is_unlabeled)


@dataclass(frozen=True)
class DistributionSpec:
    """
    Per-tactic sentence counts for the synthetic corpus generator.
    `overlap` is the fraction of each sentence's tokens drawn from the pool shared by all tactics.
    """

    counts: Mapping[TacticId, int]
    overlap: float
    seed: int
    tokens_per_sentence: int = 12
    _total: int = field(default=0, repr=False, compare=False)

    def __post_init__(self):
        if any(int(c) < 0 for c in self.counts.values()):
            raise ValidationError("Distribution counts must be non-negative")
        total = sum(int(c) for c in self.counts.values())
        if total <= 0:
            raise ValidationError("Distribution total count must be positive")
        if not (0.0 <= float(self.overlap) <= 1.0):
            raise ValidationError(f"Overlap fraction must be within [0, 1], got {self.overlap}")
        if not (0 <= int(self.seed) <= MAX_SEED):
            raise ValidationError("Seed must be a 64-bit unsigned integer")
        if int(self.tokens_per_sentence) < 1:
            raise ValidationError("tokens_per_sentence must be at least 1")
        object.__setattr__(self, "_total", total)

    @property
    def total(self) -> int:
        return self._total
