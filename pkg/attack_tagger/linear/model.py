from __future__ import annotations

from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np
from scipy import sparse

from attack_tagger.errors import DimensionMismatch, NOutOfRange, ValidationError
from attack_tagger.vectorize import SparseVector

MAX_SEED = 2**64 - 1


@dataclass(frozen=True)
class Hyperparams:
    eta0: float = 0.1
    alpha: float = 1e-4
    epochs: int = 10
    seed: int = 0

    def __post_init__(self):
        if not float(self.eta0) > 0.0:
            raise ValidationError(f"eta0 must be positive, got {self.eta0}")
        if not float(self.alpha) >= 0.0:
            raise ValidationError(f"alpha must be non-negative, got {self.alpha}")
        if int(self.epochs) < 1:
            raise ValidationError(f"epochs must be at least 1, got {self.epochs}")
        if not (0 <= int(self.seed) <= MAX_SEED):
            raise ValidationError("seed must be a 64-bit unsigned integer")


@dataclass(frozen=True)
class TrainingMeta:
    hyperparams: Hyperparams
    fingerprint: str = ""


@dataclass(frozen=True, eq=False)
class LinearModel:
    """
    One-vs-rest linear scorer. Row i of `weights` and `bias[i]` belong to `classes[i]`.
    Weights are stored sparse: columns never seen in training stay zero.
    """

    classes: Tuple[str, ...]
    weights: sparse.csr_matrix
    bias: np.ndarray
    dimension: int
    meta: TrainingMeta

    def __post_init__(self):
        classes = tuple(str(c) for c in self.classes)
        if not classes:
            raise ValidationError("LinearModel needs at least one class")
        if list(classes) != sorted(set(classes)):
            raise ValidationError("classes must be distinct and sorted")
        w = sparse.csr_matrix(self.weights, dtype=np.float64)
        w.sort_indices()
        if w.shape != (len(classes), int(self.dimension)):
            raise DimensionMismatch(f"weights shape {w.shape} != ({len(classes)}, {self.dimension})")
        b = np.asarray(self.bias, dtype=np.float64)
        if b.shape != (len(classes),):
            raise DimensionMismatch(f"bias length {b.size} != {len(classes)}")
        if not (np.all(np.isfinite(w.data)) and np.all(np.isfinite(b))):
            raise ValidationError("weights and bias must be finite")
        object.__setattr__(self, "classes", classes)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "bias", b)
        object.__setattr__(self, "dimension", int(self.dimension))

    @property
    def class_count(self) -> int:
        return len(self.classes)

    def row_of(self, label: str) -> int:
        i = int(np.searchsorted(np.asarray(self.classes), label))
        if i < len(self.classes) and self.classes[i] == label:
            return i
        return -1

    def structurally_equal(self, other: "LinearModel") -> bool:
        if not isinstance(other, LinearModel):
            return False
        if self.classes != other.classes or self.dimension != other.dimension or self.meta != other.meta:
            return False
        if not np.array_equal(self.bias, other.bias):
            return False
        a, b = self.weights, other.weights
        return (
            np.array_equal(a.indptr, b.indptr)
            and np.array_equal(a.indices, b.indices)
            and np.array_equal(a.data, b.data)
        )


@dataclass(frozen=True)
class RankedPrediction:
    """
    (label, score) pairs, descending score, ties by ascending label.
    """

    entries: Tuple[Tuple[str, float], ...]

    @property
    def labels(self) -> List[str]:
        return [label for label, _ in self.entries]

    @property
    def label_set(self) -> frozenset:
        return frozenset(self.labels)

    def __len__(self) -> int:
        return len(self.entries)

    def to_list(self) -> List[dict]:
        return [{"label": label, "score": score} for label, score in self.entries]


def decision_scores(model: LinearModel, x: SparseVector) -> np.ndarray:
    if int(x.dimension) != model.dimension:
        raise DimensionMismatch(f"vector dimension {x.dimension} != model dimension {model.dimension}")
    if x.nnz == 0:
        return model.bias.copy()
    linear = np.asarray(model.weights[:, x.indices] @ x.values, dtype=np.float64).ravel()
    return linear + model.bias


def rank(classes: Sequence[str], scores: np.ndarray, n: int) -> RankedPrediction:
    if not (1 <= int(n) <= len(classes)):
        raise NOutOfRange(f"n must be in [1, {len(classes)}], got {n}")
    # classes are sorted, so the row index doubles as the label tie-breaker.
    order = np.lexsort((np.arange(len(classes)), -np.asarray(scores, dtype=np.float64)))
    return RankedPrediction(tuple((classes[int(i)], float(scores[int(i)])) for i in order[: int(n)]))


def predict_top_n(model: LinearModel, x: SparseVector, n: int) -> RankedPrediction:
    if not (1 <= int(n) <= model.class_count):
        raise NOutOfRange(f"n must be in [1, {model.class_count}], got {n}")
    return rank(model.classes, decision_scores(model, x), n)
