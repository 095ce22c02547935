from __future__ import annotations

import hashlib
import logging
from typing import Optional, Sequence

import numpy as np
from scipy import sparse

from attack_tagger.errors import DimensionMismatch, EmptyCorpus, SingleClass
from attack_tagger.linear.model import Hyperparams, LinearModel, TrainingMeta
from attack_tagger.rng import make_rng
from attack_tagger.vectorize import SparseVector

logger = logging.getLogger("attack_tagger.linear")


def learning_rate(hp: Hyperparams, t: int) -> float:
    return float(hp.eta0) / (1.0 + float(hp.alpha) * float(hp.eta0) * float(t))


def sgd_step(
    weights: np.ndarray,
    bias: np.ndarray,
    cols: np.ndarray,
    vals: np.ndarray,
    targets: np.ndarray,
    eta: float,
    alpha: float,
) -> None:
    """
    One hinge-loss subgradient step for every one-vs-rest row at once, in place.
    `weights` is (classes, features); `cols`/`vals` are the sample's non-zero entries;
    `targets` holds +1/-1 per class. Margins use the weights from before the step.
    """
    margins = targets * (weights[:, cols] @ vals + bias)
    if alpha != 0.0:
        weights *= 1.0 - eta * alpha
    rows = np.flatnonzero(margins < 1.0)
    if rows.size:
        step = eta * targets[rows]
        if cols.size:
            weights[np.ix_(rows, cols)] += np.outer(step, vals)
        bias[rows] += step


def training_fingerprint(vectors: Sequence[SparseVector], labels: Sequence[str]) -> str:
    h = hashlib.sha256()
    for x, y in zip(vectors, labels):
        h.update(np.int64(x.dimension).tobytes())
        h.update(np.int64(x.nnz).tobytes())
        h.update(x.indices.astype("<i8").tobytes())
        h.update(x.values.astype("<f8").tobytes())
        h.update(str(y).encode("utf-8") + b"\0")
    return h.hexdigest()


def train_multiclass(
    vectors: Sequence[SparseVector],
    labels: Sequence[str],
    hp: Hyperparams,
    *,
    init: Optional[LinearModel] = None,
) -> LinearModel:
    """
    One-vs-rest hinge SGD with L2 shrinkage on every step.

    All classes share one seeded sample order, re-drawn each epoch, and one global step counter.
    With `init`, rows of classes the prior model also knows start from its weights and bias.
    """
    if not vectors:
        raise EmptyCorpus("No training samples")
    if len(vectors) != len(labels):
        raise DimensionMismatch(f"{len(vectors)} vectors but {len(labels)} labels")
    dimension = int(vectors[0].dimension)
    for x in vectors:
        if int(x.dimension) != dimension:
            raise DimensionMismatch(f"mixed vector dimensions {dimension} and {x.dimension}")
    if init is not None and init.dimension != dimension:
        raise DimensionMismatch(f"prior model dimension {init.dimension} != {dimension}")

    classes = tuple(sorted(set(str(y) for y in labels)))
    if len(classes) < 2:
        raise SingleClass(f"Need at least 2 distinct labels, got {list(classes)}")

    # Work in the compact space of columns that can become non-zero.
    parts = [x.indices for x in vectors]
    if init is not None:
        parts.append(init.weights.indices.astype(np.int64))
    active = np.unique(np.concatenate(parts)).astype(np.int64)
    local = [(np.searchsorted(active, x.indices), x.values) for x in vectors]

    weights = np.zeros((len(classes), active.size), dtype=np.float64)
    bias = np.zeros(len(classes), dtype=np.float64)
    if init is not None:
        for c, label in enumerate(classes):
            row = init.row_of(label)
            if row >= 0:
                weights[c] = init.weights[row][:, active].toarray().ravel()
                bias[c] = init.bias[row]

    class_index = {label: c for c, label in enumerate(classes)}
    targets = -np.ones((len(vectors), len(classes)), dtype=np.float64)
    for i, y in enumerate(labels):
        targets[i, class_index[str(y)]] = 1.0

    logger.info(
        "training %s classes on %s samples (%s active features, %s epochs)",
        len(classes),
        len(vectors),
        active.size,
        hp.epochs,
    )
    rng = make_rng(int(hp.seed))
    alpha = float(hp.alpha)
    t = 0
    for _ in range(int(hp.epochs)):
        for i in rng.permutation(len(vectors)):
            cols, vals = local[int(i)]
            sgd_step(weights, bias, cols, vals, targets[int(i)], learning_rate(hp, t), alpha)
            t += 1

    compact = sparse.csr_matrix(weights)
    full = sparse.csr_matrix(
        (compact.data, active[compact.indices], compact.indptr),
        shape=(len(classes), dimension),
    )
    return LinearModel(
        classes=classes,
        weights=full,
        bias=bias,
        dimension=dimension,
        meta=TrainingMeta(hyperparams=hp, fingerprint=training_fingerprint(vectors, labels)),
    )
