from __future__ import annotations

import json
from pathlib import Path
from typing import Dict, FrozenSet, List, Union

from pydantic import BaseModel, ConfigDict
from pydantic import ValidationError as SchemaError

from attack_tagger.errors import ParseError, ValidationError
from attack_tagger.taxonomy.model import (
    AttackTaxonomy,
    TacticId,
    TechniqueId,
    parse_tactic_id,
    parse_technique_id,
)

DEFAULT_TAXONOMY_PATH = Path(__file__).resolve().parent / "data" / "enterprise-v14.json"


class _TacticEntry(BaseModel):
    model_config = ConfigDict(extra="forbid", strict=True)

    id: str
    name: str


class _TechniqueEntry(BaseModel):
    model_config = ConfigDict(extra="forbid", strict=True)

    id: str
    name: str
    tactic_ids: List[str]


class _TaxonomyFile(BaseModel):
    model_config = ConfigDict(extra="forbid", strict=True)

    version: str
    tactics: List[_TacticEntry]
    techniques: List[_TechniqueEntry]


def load_taxonomy(source: Union[bytes, str]) -> AttackTaxonomy:
    """
    Parse and validate a taxonomy file:
    {"version": str, "tactics": [{"id", "name"}], "techniques": [{"id", "name", "tactic_ids"}]}
    Unknown keys are rejected.
    """
    raw = source.encode("utf-8") if isinstance(source, str) else bytes(source)
    try:
        doc = json.loads(raw.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise ParseError(f"Taxonomy is not valid UTF-8 JSON: {e}") from e
    try:
        parsed = _TaxonomyFile.model_validate(doc)
    except SchemaError as e:
        raise ParseError(f"Taxonomy does not match the file format: {e}") from e

    tactics: Dict[TacticId, str] = {}
    for entry in parsed.tactics:
        tid = parse_tactic_id(entry.id)
        if tid in tactics:
            raise ValidationError(f"Duplicate tactic id: {tid}")
        tactics[tid] = entry.name

    techniques: Dict[TechniqueId, str] = {}
    parents: Dict[TechniqueId, FrozenSet[TacticId]] = {}
    for entry in parsed.techniques:
        tid = parse_technique_id(entry.id)
        if tid in techniques:
            raise ValidationError(f"Duplicate technique id: {tid}")
        if not entry.tactic_ids:
            raise ValidationError(f"Technique {tid} has an empty tactic_ids list")
        techniques[tid] = entry.name
        parents[tid] = frozenset(parse_tactic_id(p) for p in entry.tactic_ids)

    return AttackTaxonomy(version=parsed.version, tactics=tactics, techniques=techniques, parents=parents)


def load_taxonomy_file(path: Union[str, Path]) -> AttackTaxonomy:
    p = Path(path)
    return load_taxonomy(p.read_bytes())


def load_default_taxonomy() -> AttackTaxonomy:
    """
    The bundled Enterprise v14 reference taxonomy.
    """
    return load_taxonomy_file(DEFAULT_TAXONOMY_PATH)
