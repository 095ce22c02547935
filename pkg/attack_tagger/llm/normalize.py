from __future__ import annotations

import json
import re
from dataclasses import dataclass
from typing import Optional

from attack_tagger.errors import ValidationError
from attack_tagger.taxonomy import AttackTaxonomy

_FENCED_RE = re.compile(r"^```[A-Za-z0-9_-]*\s*(.*?)\s*```$", re.DOTALL)
_TACTIC_PREFIX_RE = re.compile(r"^(TA\d{4})(?:\s*[-:]\s*(.*))?$", re.IGNORECASE)

UNMAPPABLE_TACTIC = "unmappable tactic"


@dataclass(frozen=True)
class LlmVerdict:
    raw_response: str
    normalized: Optional[str] = None
    failure_reason: Optional[str] = None

    def __post_init__(self):
        if (self.normalized is None) == (self.failure_reason is None):
            raise ValidationError("exactly one of normalized / failure_reason must be set")

    @property
    def ok(self) -> bool:
        return self.normalized is not None


def strip_fences(raw: str) -> str:
    text = str(raw or "").strip()
    m = _FENCED_RE.match(text)
    return m.group(1) if m else text


def _fail(raw: str, reason: str) -> LlmVerdict:
    return LlmVerdict(raw_response=raw, failure_reason=reason)


def normalize_response(raw: str, taxonomy: AttackTaxonomy) -> LlmVerdict:
    """
    Map a chat reply to a tactic id. Accepted "Tag" values: "TA0007", "TA0007 - Discovery",
    or a tactic name in any letter case. Every failure reason starts with "unmappable".
    """
    raw = str(raw or "")
    try:
        doc = json.loads(strip_fences(raw))
    except json.JSONDecodeError:
        return _fail(raw, "unmappable response: invalid JSON")
    if not isinstance(doc, dict):
        return _fail(raw, "unmappable response: not a JSON object")
    key = next((k for k in doc if str(k).lower() == "tag"), None)
    if key is None:
        return _fail(raw, "unmappable response: no Tag field")
    value = doc[key]
    if not isinstance(value, str) or not value.strip():
        return _fail(raw, UNMAPPABLE_TACTIC)
    value = value.strip()

    m = _TACTIC_PREFIX_RE.match(value)
    if m:
        tactic = m.group(1).upper()
        return LlmVerdict(raw, normalized=tactic) if tactic in taxonomy.tactics else _fail(raw, UNMAPPABLE_TACTIC)

    by_name = {name.strip().lower(): tid for tid, name in taxonomy.tactics.items()}
    tactic = by_name.get(value.lower())
    if tactic is None:
        return _fail(raw, UNMAPPABLE_TACTIC)
    return LlmVerdict(raw, normalized=tactic)
