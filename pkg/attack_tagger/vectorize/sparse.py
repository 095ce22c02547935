from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, List, Mapping, Tuple

import numpy as np

from attack_tagger.errors import DimensionMismatch


@dataclass(frozen=True, eq=False)
class SparseVector:
    """
    Sorted (index, value) entries over [0, dimension). Zero values are never stored.
    """

    dimension: int
    indices: np.ndarray
    values: np.ndarray
    normalized: bool = False

    def __post_init__(self):
        if int(self.dimension) <= 0:
            raise DimensionMismatch("dimension must be positive")
        idx = np.asarray(self.indices, dtype=np.int64)
        val = np.asarray(self.values, dtype=np.float64)
        if idx.shape != val.shape or idx.ndim != 1:
            raise DimensionMismatch("indices and values must be 1-d arrays of equal length")
        if idx.size:
            if np.any(np.diff(idx) <= 0):
                raise DimensionMismatch("indices must be strictly increasing")
            if idx[0] < 0 or idx[-1] >= int(self.dimension):
                raise DimensionMismatch(f"indices must lie in [0, {self.dimension})")
            if np.any(val == 0.0):
                raise DimensionMismatch("zero values must not be stored")
        object.__setattr__(self, "indices", idx)
        object.__setattr__(self, "values", val)

    @classmethod
    def zeros(cls, dimension: int) -> "SparseVector":
        return cls(dimension, np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.float64), normalized=True)

    @classmethod
    def from_mapping(cls, dimension: int, entries: Mapping[int, float], *, normalized: bool = False) -> "SparseVector":
        items = sorted((int(i), float(v)) for i, v in entries.items() if float(v) != 0.0)
        idx = np.array([i for i, _ in items], dtype=np.int64)
        val = np.array([v for _, v in items], dtype=np.float64)
        return cls(dimension, idx, val, normalized=normalized)

    @property
    def entries(self) -> List[Tuple[int, float]]:
        return [(int(i), float(v)) for i, v in zip(self.indices, self.values)]

    @property
    def nnz(self) -> int:
        return int(self.indices.size)

    def norm(self) -> float:
        return float(np.linalg.norm(self.values)) if self.values.size else 0.0

    def scaled(self, factor: float) -> "SparseVector":
        if factor == 0.0:
            return SparseVector.zeros(self.dimension)
        return SparseVector(self.dimension, self.indices.copy(), self.values * float(factor), normalized=False)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SparseVector):
            return NotImplemented
        return (
            self.dimension == other.dimension
            and np.array_equal(self.indices, other.indices)
            and np.array_equal(self.values, other.values)
        )

    __hash__ = None  # type: ignore[assignment]


def l2_normalized(dimension: int, indices: Iterable[int], values: Iterable[float]) -> SparseVector:
    idx = np.asarray(list(indices), dtype=np.int64)
    val = np.asarray(list(values), dtype=np.float64)
    keep = val != 0.0
    idx, val = idx[keep], val[keep]
    if idx.size == 0:
        return SparseVector.zeros(dimension)
    order = np.argsort(idx, kind="stable")
    idx, val = idx[order], val[order]
    val = val / np.linalg.norm(val)
    return SparseVector(dimension, idx, val, normalized=True)
