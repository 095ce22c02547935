from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Dict, List, Mapping, Optional, Tuple

from attack_tagger.errors import DimensionMismatch, MissingComponent, NOutOfRange, NotTrained, ValidationError
from attack_tagger.hierarchy.tasks import TaskKind, TaskMode, TaskPrediction
from attack_tagger.linear import LinearModel, predict_top_n
from attack_tagger.taxonomy import AttackTaxonomy
from attack_tagger.vectorize import SparseVector, Vectorizer, transform


@dataclass(frozen=True)
class PairEntry:
    tactic: str
    tactic_score: float
    techniques: Tuple[Tuple[str, float], ...] = ()

    def to_dict(self) -> Dict[str, Any]:
        return {
            "tactic": self.tactic,
            "score": self.tactic_score,
            "techniques": [{"label": te, "score": s} for te, s in self.techniques],
        }


@dataclass(frozen=True)
class PairPrediction:
    entries: Tuple[PairEntry, ...]

    @property
    def tactics(self) -> List[str]:
        return [e.tactic for e in self.entries]

    def flattened(self) -> List[Tuple[str, str]]:
        return [(e.tactic, te) for e in self.entries for te, _ in e.techniques]

    def techniques_under(self, tactic: str) -> List[str]:
        for e in self.entries:
            if e.tactic == tactic:
                return [te for te, _ in e.techniques]
        return []

    def to_list(self) -> List[Dict[str, Any]]:
        return [e.to_dict() for e in self.entries]


@dataclass(frozen=True, eq=False)
class HierarchicalModel:
    """
    Tactic model on top, one technique model per tactic underneath (tactics whose training
    data never showed two techniques have none), and an optional flat technique model.
    """

    vectorizer: Vectorizer
    tactic_model: Optional[LinearModel]
    technique_models: Mapping[str, LinearModel]
    taxonomy: AttackTaxonomy
    flat_technique_model: Optional[LinearModel] = None

    def __post_init__(self):
        dim = self.vectorizer.dimension
        if self.tactic_model is not None:
            unknown = [c for c in self.tactic_model.classes if c not in self.taxonomy.tactics]
            if unknown:
                raise ValidationError(f"tactic model has classes outside the taxonomy: {unknown}")
            if self.tactic_model.dimension != dim:
                raise DimensionMismatch(f"tactic model dimension {self.tactic_model.dimension} != {dim}")
        for tactic, model in self.technique_models.items():
            allowed = self.taxonomy.techniques_for(tactic)
            stray = [c for c in model.classes if c not in allowed]
            if stray:
                raise ValidationError(f"technique model for {tactic} has non-child classes: {stray}")
            if model.dimension != dim:
                raise DimensionMismatch(f"technique model for {tactic} has dimension {model.dimension} != {dim}")
        if self.flat_technique_model is not None and self.flat_technique_model.dimension != dim:
            raise DimensionMismatch(f"flat technique model dimension {self.flat_technique_model.dimension} != {dim}")
        object.__setattr__(self, "technique_models", dict(sorted(self.technique_models.items())))

    @property
    def trained(self) -> bool:
        return self.tactic_model is not None and self.vectorizer.fitted

    def vectorize(self, text: str) -> SparseVector:
        if not self.trained:
            raise NotTrained("Hierarchical model has no trained tactic model")
        return transform(self.vectorizer, text)

    def structurally_equal(self, other: "HierarchicalModel") -> bool:
        if not isinstance(other, HierarchicalModel):
            return False
        if self.taxonomy.to_json_bytes() != other.taxonomy.to_json_bytes():
            return False
        if not self.vectorizer.structurally_equal(other.vectorizer):
            return False
        if (self.tactic_model is None) != (other.tactic_model is None):
            return False
        if self.tactic_model is not None and not self.tactic_model.structurally_equal(other.tactic_model):
            return False
        if list(self.technique_models) != list(other.technique_models):
            return False
        if any(not m.structurally_equal(other.technique_models[k]) for k, m in self.technique_models.items()):
            return False
        if (self.flat_technique_model is None) != (other.flat_technique_model is None):
            return False
        if self.flat_technique_model is not None:
            return self.flat_technique_model.structurally_equal(other.flat_technique_model)
        return True


def _pairs_from_vector(h: HierarchicalModel, x: SparseVector, n: int, m: int) -> PairPrediction:
    if int(m) < 1:
        raise NOutOfRange(f"m must be >= 1, got {m}")
    top = predict_top_n(h.tactic_model, x, n)
    entries: List[PairEntry] = []
    for tactic, score in top.entries:
        model = h.technique_models.get(tactic)
        techniques: Tuple[Tuple[str, float], ...] = ()
        if model is not None:
            techniques = predict_top_n(model, x, min(int(m), model.class_count)).entries
        entries.append(PairEntry(tactic=tactic, tactic_score=score, techniques=techniques))
    return PairPrediction(tuple(entries))


def predict_pairs(h: HierarchicalModel, text: str, n: int, m: int) -> PairPrediction:
    """
    Top-n tactics, each with up to m techniques from its own technique model.
    """
    return _pairs_from_vector(h, h.vectorize(text), n, m)


def _flat(h: HierarchicalModel, mode: TaskMode) -> LinearModel:
    if h.flat_technique_model is None:
        raise MissingComponent(f"mode {mode.name} needs the flat technique model (train with --train-flat-technique)")
    return h.flat_technique_model


def predict_task_vector(h: HierarchicalModel, x: SparseVector, mode: TaskMode) -> TaskPrediction:
    if not h.trained:
        raise NotTrained("Hierarchical model has no trained tactic model")
    kind = mode.kind
    if kind in (TaskKind.MULTICLASS_TACTIC, TaskKind.MULTILABEL_TACTIC):
        return TaskPrediction(mode, tactics=predict_top_n(h.tactic_model, x, mode.n))
    if kind in (TaskKind.MULTICLASS_TECHNIQUE, TaskKind.MULTILABEL_TECHNIQUE):
        return TaskPrediction(mode, techniques=predict_top_n(_flat(h, mode), x, mode.n))
    if kind == TaskKind.MIXED_MULTILABEL:
        # n is capped per side, as m is for technique models.
        flat = _flat(h, mode)
        return TaskPrediction(
            mode,
            tactics=predict_top_n(h.tactic_model, x, min(mode.n, h.tactic_model.class_count)),
            techniques=predict_top_n(flat, x, min(mode.n, flat.class_count)),
        )
    return TaskPrediction(mode, pairs=_pairs_from_vector(h, x, mode.n, mode.m))


def predict_task(h: HierarchicalModel, text: str, mode: TaskMode) -> TaskPrediction:
    if mode.needs_flat_model:
        _flat(h, mode)
    return predict_task_vector(h, h.vectorize(text), mode)

