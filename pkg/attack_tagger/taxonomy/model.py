from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, List, Mapping, NewType

from attack_tagger.errors import UnknownTactic, ValidationError

TacticId = NewType("TacticId", str)
TechniqueId = NewType("TechniqueId", str)

_TACTIC_RE = re.compile(r"^TA\d{4}$")
_TECHNIQUE_RE = re.compile(r"^T\d{4}$")
_SUBTECHNIQUE_RE = re.compile(r"^T\d{4}\.\d{3}$")


def parse_tactic_id(value: str) -> TacticId:
    raw = str(value or "").strip().upper()
    if not _TACTIC_RE.match(raw):
        raise ValidationError(f"Invalid tactic id: {value!r} (expected TA followed by 4 digits)")
    return TacticId(raw)


def parse_technique_id(value: str) -> TechniqueId:
    raw = str(value or "").strip().upper()
    if _SUBTECHNIQUE_RE.match(raw):
        raise ValidationError(f"Sub-technique ids are not supported: {value!r} (use the parent technique id)")
    if not _TECHNIQUE_RE.match(raw):
        raise ValidationError(f"Invalid technique id: {value!r} (expected T followed by 4 digits)")
    return TechniqueId(raw)


@dataclass(frozen=True)
class AttackTaxonomy:
    """
    ATT&CK tactics, techniques and the technique -> tactic parent map.
    Immutable once built; all joins are on ids, display names are informational only.
    """

    version: str
    tactics: Mapping[TacticId, str]
    techniques: Mapping[TechniqueId, str]
    parents: Mapping[TechniqueId, FrozenSet[TacticId]]
    _children: Dict[TacticId, FrozenSet[TechniqueId]] = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        for technique, tactic_ids in self.parents.items():
            if technique not in self.techniques:
                raise ValidationError(f"Parent map references unknown technique {technique}")
            if not tactic_ids:
                raise ValidationError(f"Technique {technique} has no tactic parents")
            for tactic in tactic_ids:
                if tactic not in self.tactics:
                    raise ValidationError(f"Technique {technique} lists unknown parent tactic {tactic}")
        for technique in self.techniques:
            if technique not in self.parents:
                raise ValidationError(f"Technique {technique} has no tactic parents")

        children: Dict[TacticId, set] = {t: set() for t in self.tactics}
        for technique, tactic_ids in self.parents.items():
            for tactic in tactic_ids:
                children[tactic].add(technique)
        self._children.clear()
        self._children.update({t: frozenset(c) for t, c in children.items()})

    def techniques_for(self, tactic: str) -> FrozenSet[TechniqueId]:
        if tactic not in self.tactics:
            raise UnknownTactic(f"Unknown tactic: {tactic}")
        return self._children[TacticId(tactic)]

    def validate_pair(self, tactic: str, technique: str) -> bool:
        if tactic not in self.tactics or technique not in self.techniques:
            return False
        return tactic in self.parents.get(TechniqueId(technique), frozenset())

    def tactic_name(self, tactic: str) -> str:
        return str(self.tactics.get(TacticId(tactic), tactic))

    def sorted_tactics(self) -> List[TacticId]:
        return sorted(self.tactics)

    def to_json_bytes(self) -> bytes:
        """
        Canonical serialization (sorted ids, sorted parents) in the taxonomy file format.
        """
        doc = {
            "version": self.version,
            "tactics": [{"id": t, "name": self.tactics[t]} for t in sorted(self.tactics)],
            "techniques": [
                {"id": t, "name": self.techniques[t], "tactic_ids": sorted(self.parents[t])}
                for t in sorted(self.techniques)
            ],
        }
        return json.dumps(doc, ensure_ascii=False, sort_keys=True, separators=(",", ":")).encode("utf-8")


def techniques_for(taxonomy: AttackTaxonomy, tactic: str) -> FrozenSet[TechniqueId]:
    return taxonomy.techniques_for(tactic)


def validate_pair(taxonomy: AttackTaxonomy, tactic: str, technique: str) -> bool:
    return taxonomy.validate_pair(tactic, technique)
