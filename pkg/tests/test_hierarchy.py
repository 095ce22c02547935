from __future__ import annotations

import pytest

from attack_tagger.corpus import Corpus
from attack_tagger.errors import EmptyCorpus, MissingComponent, NotTrained, SingleClass, ValidationError
from attack_tagger.hierarchy import (
    HierarchicalModel,
    TaskKind,
    TaskMode,
    TrainOptions,
    predict_pairs,
    predict_task,
    train_hierarchical,
)
from attack_tagger.linear import Hyperparams, predict_top_n
from attack_tagger.vectorize import VectorizerConfig, fit_vocabulary_tfidf

from conftest import sentence, synth


def _training_accuracy(model, corpus, tactic):
    hits = total = 0
    for s in corpus.sentences:
        if tactic not in s.tactic_labels:
            continue
        x = model.vectorize(s.text)
        (technique,) = s.technique_labels
        total += 1
        hits += int(predict_top_n(model.technique_models[tactic], x, 1).labels[0] == technique)
    return hits / total


def test_technique_models_follow_observed_techniques(taxonomy, small_corpus, small_model):
    for tactic in small_model.tactic_model.classes:
        observed = {te for s in small_corpus.sentences if tactic in s.tactic_labels for te in s.technique_labels}
        model = small_model.technique_models.get(tactic)
        if len(observed) >= 2:
            assert model is not None
            assert set(model.classes) == observed
            assert set(model.classes) <= taxonomy.techniques_for(tactic)
        else:
            assert model is None


def test_overlap_zero_technique_models_fit_training_data(taxonomy):
    tactics = ["TA0001", "TA0010", "TA0042"]
    corpus = synth(taxonomy, per_tactic=80, overlap=0.0, seed=4, tactics=tactics)
    model = train_hierarchical(corpus, taxonomy, VectorizerConfig(), Hyperparams(epochs=20, seed=1))
    for tactic in tactics:
        assert _training_accuracy(model, corpus, tactic) == 1.0


def test_single_technique_tactic_gets_no_model(tiny_taxonomy):
    corpus = Corpus(
        (
            sentence("alpha alpha token", ["TA0001"], ["T1001"]),
            sentence("beta beta token", ["TA0001"], ["T1002"]),
            sentence("gamma gamma word", ["TA0002"], ["T1003"]),
            sentence("gamma more word", ["TA0002"], ["T1003"]),
        )
    )
    model = train_hierarchical(corpus, tiny_taxonomy, VectorizerConfig(), Hyperparams(epochs=3))
    assert set(model.technique_models) == {"TA0001"}
    pred = predict_pairs(model, "gamma word", 2, 3)
    by_tactic = {e.tactic: e for e in pred.entries}
    assert by_tactic["TA0002"].techniques == ()
    assert len(by_tactic["TA0001"].techniques) == 2


def test_multi_label_sentences_feed_every_tactic(tiny_taxonomy):
    corpus = Corpus(
        (
            sentence("shared delta text", ["TA0002", "TA0003"], ["T1004"]),
            sentence("gamma only text", ["TA0002"], ["T1003"]),
            sentence("epsilon only text", ["TA0003"], ["T1005"]),
        )
    )
    model = train_hierarchical(corpus, tiny_taxonomy, VectorizerConfig(), Hyperparams(epochs=2))
    assert model.tactic_model.classes == ("TA0002", "TA0003")
    assert model.technique_models["TA0002"].classes == ("T1003", "T1004")
    assert model.technique_models["TA0003"].classes == ("T1004", "T1005")


def test_training_errors(tiny_taxonomy):
    with pytest.raises(EmptyCorpus):
        train_hierarchical(Corpus((sentence("no labels"),)), tiny_taxonomy, VectorizerConfig(), Hyperparams())
    corpus = Corpus((sentence("one two", ["TA0001"], ["T1001"]), sentence("three four", ["TA0001"], ["T1002"])))
    with pytest.raises(SingleClass, match="tactic model"):
        train_hierarchical(corpus, tiny_taxonomy, VectorizerConfig(), Hyperparams())
    with pytest.raises(ValidationError):
        TrainOptions(technique_split="sideways")


def test_pairs_shape_and_consistency(taxonomy, small_corpus, small_model):
    for text in small_corpus.texts()[::37]:
        pred = predict_pairs(small_model, text, 3, 3)
        top = predict_top_n(small_model.tactic_model, small_model.vectorize(text), 3)
        assert pred.tactics == top.labels
        assert len(pred.flattened()) == 9
        for tactic, technique in pred.flattened():
            assert taxonomy.validate_pair(tactic, technique)


def test_pair_mode_matches_n1_m1(small_corpus, small_model):
    text = small_corpus.texts()[0]
    single = predict_task(small_model, text, TaskMode(TaskKind.MULTICLASS_HIERARCHICAL, 5, 5))
    assert single.mode.n == 1 and single.mode.m == 1
    assert single.pairs.flattened() == predict_pairs(small_model, text, 1, 1).flattened()
    assert len(single.pairs.flattened()) == 1


def test_task_modes(small_corpus, small_model):
    text = small_corpus.texts()[3]
    assert len(predict_task(small_model, text, TaskMode.from_name("tactic")).tactics) == 1
    everything = predict_task(small_model, text, TaskMode.from_name("tactic-topn", 14))
    assert sorted(everything.tactics.labels) == sorted(small_model.taxonomy.tactics)
    assert len(predict_task(small_model, text, TaskMode.from_name("technique")).techniques) == 1
    assert len(predict_task(small_model, text, TaskMode.from_name("technique-topn", 4)).techniques) == 4
    mixed = predict_task(small_model, text, TaskMode.from_name("mixed-topn", 2))
    assert len(mixed.tactics) == 2 and len(mixed.techniques) == 2
    assert mixed.labels() == mixed.tactics.label_set | mixed.techniques.label_set
    pairs = predict_task(small_model, text, TaskMode.from_name("pairs", 2, 2))
    assert pairs.to_dict()["mode"] == "pairs"
    assert len(pairs.to_dict()["pairs"]) == 2


def test_mixed_mode_caps_n_per_model(small_corpus, small_model):
    flat = small_model.flat_technique_model
    tactics = small_model.tactic_model.class_count
    wide = predict_task(small_model, small_corpus.texts()[0], TaskMode.from_name("mixed-topn", flat.class_count + 3))
    assert len(wide.tactics) == tactics
    assert len(wide.techniques) == flat.class_count
    assert wide.labels() == set(small_model.tactic_model.classes) | set(flat.classes)


def test_flat_modes_need_the_flat_model(small_corpus, small_hashed_model):
    text = small_corpus.texts()[0]
    for name in ("technique", "technique-topn", "mixed-topn"):
        with pytest.raises(MissingComponent, match="flat technique model"):
            predict_task(small_hashed_model, text, TaskMode.from_name(name, 2))


def test_untrained_model(tiny_taxonomy):
    model = HierarchicalModel(
        vectorizer=fit_vocabulary_tfidf(["aa bb"]),
        tactic_model=None,
        technique_models={},
        taxonomy=tiny_taxonomy,
    )
    with pytest.raises(NotTrained):
        predict_pairs(model, "aa", 1, 1)


def test_task_mode_validation():
    with pytest.raises(ValidationError):
        TaskMode(TaskKind.MULTILABEL_TACTIC, 0)
    with pytest.raises(ValidationError):
        TaskMode.from_name("everything")
    assert TaskMode.from_name("pairs", 3, 3).describe() == "pairs (n=3, m=3)"
    assert TaskMode.from_name("tactic-topn", 3, 9).m == 1


def test_technique_split_and_workers_are_deterministic(taxonomy, small_corpus):
    hp = Hyperparams(epochs=2, seed=5)
    sequential = train_hierarchical(small_corpus, taxonomy, VectorizerConfig(), hp)
    threaded = train_hierarchical(small_corpus, taxonomy, VectorizerConfig(), hp, TrainOptions(max_workers=4))
    assert sequential.structurally_equal(threaded)

    fresh_a = train_hierarchical(small_corpus, taxonomy, VectorizerConfig(), hp, TrainOptions(technique_split="fresh"))
    fresh_b = train_hierarchical(small_corpus, taxonomy, VectorizerConfig(), hp, TrainOptions(technique_split="fresh"))
    assert fresh_a.structurally_equal(fresh_b)
    assert fresh_a.tactic_model.structurally_equal(sequential.tactic_model)
    assert not fresh_a.structurally_equal(sequential)


def test_warm_start_reuses_vectorizer(taxonomy, small_corpus, small_hashed_model):
    extra = synth(taxonomy, per_tactic=5, overlap=0.2, seed=99)
    warm = train_hierarchical(
        extra,
        taxonomy,
        VectorizerConfig(),
        Hyperparams(epochs=1),
        TrainOptions(init=small_hashed_model),
    )
    assert warm.vectorizer is small_hashed_model.vectorizer
    assert warm.tactic_model.dimension == small_hashed_model.vectorizer.dimension
