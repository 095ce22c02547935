from __future__ import annotations

import numpy as np
import pytest
from scipy import sparse

from attack_tagger.errors import DimensionMismatch, NOutOfRange, SingleClass, ValidationError
from attack_tagger.linear import (
    Hyperparams,
    LinearModel,
    TrainingMeta,
    decision_scores,
    learning_rate,
    predict_top_n,
    sgd_step,
    train_multiclass,
)
from attack_tagger.vectorize import SparseVector


def _vec(dim, entries):
    return SparseVector.from_mapping(dim, entries)


def _model(weights, bias, classes=("A", "B", "C")):
    w = np.asarray(weights, dtype=float)
    return LinearModel(
        classes=tuple(classes),
        weights=sparse.csr_matrix(w),
        bias=np.asarray(bias, dtype=float),
        dimension=w.shape[1],
        meta=TrainingMeta(Hyperparams()),
    )


def test_hyperparams_validation():
    with pytest.raises(ValidationError):
        Hyperparams(eta0=0.0)
    with pytest.raises(ValidationError):
        Hyperparams(alpha=-1.0)
    with pytest.raises(ValidationError):
        Hyperparams(epochs=0)
    assert learning_rate(Hyperparams(eta0=0.1, alpha=0.0), 1000) == 0.1
    assert learning_rate(Hyperparams(eta0=0.1, alpha=1.0), 10) == pytest.approx(0.1 / 2.0)


def test_single_update_from_zero():
    weights = np.zeros((1, 2))
    bias = np.zeros(1)
    sgd_step(weights, bias, np.array([0]), np.array([1.0]), np.array([1.0]), eta=0.1, alpha=0.0)
    assert weights.tolist() == [[0.1, 0.0]]
    assert bias.tolist() == [0.1]


def test_satisfied_margin_without_regularization_is_a_no_op():
    weights = np.array([[2.0, 0.0]])
    bias = np.zeros(1)
    sgd_step(weights, bias, np.array([0]), np.array([1.0]), np.array([1.0]), eta=0.1, alpha=0.0)
    assert weights.tolist() == [[2.0, 0.0]]
    assert bias.tolist() == [0.0]


def test_update_matches_subgradient_oracle():
    rng = np.random.default_rng(11)
    for case in range(100):
        classes = int(rng.integers(2, 6))
        features = int(rng.integers(3, 9))
        weights = rng.normal(size=(classes, features))
        bias = rng.normal(size=classes)
        k = int(rng.integers(0, features + 1))
        cols = np.sort(rng.choice(features, size=k, replace=False))
        vals = rng.normal(size=k)
        targets = np.where(rng.random(classes) < 0.5, -1.0, 1.0)
        eta = float(rng.uniform(0.01, 0.5))
        alpha = 0.0 if case % 4 == 0 else float(rng.uniform(0.0, 0.1))

        expected_w = weights.copy()
        expected_b = bias.copy()
        for c in range(classes):
            margin = targets[c] * (weights[c, cols] @ vals + bias[c])
            row = weights[c] * (1.0 - eta * alpha) if alpha != 0.0 else weights[c].copy()
            if margin < 1.0:
                row[cols] = row[cols] + (eta * targets[c]) * vals
                expected_b[c] = bias[c] + eta * targets[c]
            expected_w[c] = row

        sgd_step(weights, bias, cols, vals, targets, eta, alpha)
        np.testing.assert_array_equal(weights, expected_w)
        np.testing.assert_array_equal(bias, expected_b)


def test_two_class_training_by_hand():
    vectors = [_vec(2, {0: 1.0}), _vec(2, {1: 1.0})]
    model = train_multiclass(vectors, ["A", "B"], Hyperparams(eta0=0.1, alpha=0.0, epochs=1, seed=0))
    assert model.classes == ("A", "B")
    np.testing.assert_allclose(model.weights.toarray(), [[0.1, -0.1], [-0.1, 0.1]])
    np.testing.assert_allclose(model.bias, [0.0, 0.0], atol=1e-15)


def test_separable_data_is_learned():
    vectors = [_vec(3, {0: 1.0})] * 10 + [_vec(3, {1: 1.0})] * 10 + [_vec(3, {2: 1.0})] * 10
    labels = ["A"] * 10 + ["B"] * 10 + ["C"] * 10
    model = train_multiclass(vectors, labels, Hyperparams(epochs=5))
    predicted = [predict_top_n(model, x, 1).labels[0] for x in vectors]
    assert predicted == labels


def test_training_errors():
    with pytest.raises(SingleClass):
        train_multiclass([_vec(2, {0: 1.0})], ["A"], Hyperparams())
    with pytest.raises(DimensionMismatch):
        train_multiclass([_vec(2, {0: 1.0}), _vec(3, {0: 1.0})], ["A", "B"], Hyperparams())
    with pytest.raises(DimensionMismatch):
        train_multiclass([_vec(2, {0: 1.0})], ["A", "B"], Hyperparams())


def test_training_is_deterministic():
    rng = np.random.default_rng(2)
    vectors = [_vec(20, {int(i): float(v) for i, v in zip(rng.choice(20, 3, replace=False), rng.random(3) + 0.1)}) for _ in range(40)]
    labels = [str(int(i)) for i in rng.integers(0, 4, size=40)]
    hp = Hyperparams(epochs=3, seed=99)
    a = train_multiclass(vectors, labels, hp)
    b = train_multiclass(vectors, labels, hp)
    assert a.structurally_equal(b)
    c = train_multiclass(vectors, labels, Hyperparams(epochs=3, seed=100))
    assert not a.structurally_equal(c)


def test_warm_start_uses_overlapping_classes_only():
    vectors = [_vec(4, {0: 1.0}), _vec(4, {1: 1.0}), _vec(4, {2: 1.0})]
    labels = ["B", "C", "B"]
    hp = Hyperparams(epochs=1, alpha=0.0)
    cold = train_multiclass(vectors, labels, hp)

    unrelated = _model([[1.0, 1.0, 1.0, 1.0], [2.0, 0.0, 0.0, 0.0]], [1.0, 1.0], classes=("X", "Y"))
    assert train_multiclass(vectors, labels, hp, init=unrelated).structurally_equal(cold)

    prior = _model([[0.0, 0.0, 0.0, 5.0], [0.0, 0.0, 0.0, 0.0]], [0.0, 3.0], classes=("A", "B"))
    warm = train_multiclass(vectors, labels, hp, init=prior)
    assert warm.classes == ("B", "C")
    assert not warm.structurally_equal(cold)
    assert warm.bias[0] != cold.bias[0]

    with pytest.raises(DimensionMismatch):
        train_multiclass(vectors, labels, hp, init=_model([[1.0, 0.0], [0.0, 1.0]], [0.0, 0.0], classes=("B", "C")))


def test_decision_scores():
    model = _model([[1.0, 2.0], [0.0, -1.0], [3.0, 0.0]], [0.5, -0.5, 0.0])
    zero = SparseVector.zeros(2)
    assert decision_scores(model, zero).tolist() == [0.5, -0.5, 0.0]
    x = _vec(2, {0: 0.6, 1: 0.8})
    np.testing.assert_allclose(decision_scores(model, x), [0.6 + 1.6 + 0.5, -0.8 - 0.5, 1.8])
    doubled = decision_scores(model, x.scaled(2.0)) - model.bias
    np.testing.assert_allclose(doubled, 2.0 * (decision_scores(model, x) - model.bias))
    empty = _model(np.zeros((3, 2)), np.zeros(3))
    assert decision_scores(empty, x).tolist() == [0.0, 0.0, 0.0]
    with pytest.raises(DimensionMismatch):
        decision_scores(model, SparseVector.zeros(3))


def test_predict_top_n():
    model = _model([[1.0, 0.0], [0.0, 1.0], [0.5, 0.5]], [0.0, 0.0, 0.0])
    x = _vec(2, {0: 1.0})
    assert predict_top_n(model, x, 1).labels == ["A"]
    full = predict_top_n(model, x, 3)
    assert sorted(full.labels) == ["A", "B", "C"]
    assert full.labels == ["A", "C", "B"]
    scores = [s for _, s in full.entries]
    assert scores == sorted(scores, reverse=True)
    for n in (1, 2):
        assert predict_top_n(model, x, n).labels == full.labels[:n]
    with pytest.raises(NOutOfRange):
        predict_top_n(model, x, 0)
    with pytest.raises(NOutOfRange):
        predict_top_n(model, x, 4)


def test_ties_break_by_label():
    model = _model(np.zeros((3, 2)), np.zeros(3))
    assert predict_top_n(model, _vec(2, {1: 1.0}), 2).labels == ["A", "B"]


def test_positive_scaling_keeps_ranking_without_bias():
    rng = np.random.default_rng(5)
    model = _model(rng.normal(size=(3, 6)), np.zeros(3))
    x = _vec(6, {1: 0.3, 4: -0.7, 5: 0.2})
    assert predict_top_n(model, x, 3).labels == predict_top_n(model, x.scaled(7.5), 3).labels


def test_model_invariants():
    with pytest.raises(ValidationError):
        _model(np.zeros((2, 2)), np.zeros(2), classes=("B", "A"))
    with pytest.raises(DimensionMismatch):
        _model(np.zeros((2, 2)), np.zeros(3), classes=("A", "B"))
    with pytest.raises(ValidationError):
        _model([[np.inf, 0.0], [0.0, 0.0]], np.zeros(2), classes=("A", "B"))
