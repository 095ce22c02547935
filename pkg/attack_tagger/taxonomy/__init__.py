from .model import (
    AttackTaxonomy,
    TacticId,
    TechniqueId,
    parse_tactic_id,
    parse_technique_id,
    techniques_for,
    validate_pair,
)
from .loader import DEFAULT_TAXONOMY_PATH, load_default_taxonomy, load_taxonomy, load_taxonomy_file

__all__ = [
    "AttackTaxonomy",
    "TacticId",
    "TechniqueId",
    "parse_tactic_id",
    "parse_technique_id",
    "techniques_for",
    "validate_pair",
    "DEFAULT_TAXONOMY_PATH",
    "load_default_taxonomy",
    "load_taxonomy",
    "load_taxonomy_file",
]
