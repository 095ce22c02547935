from __future__ import annotations

import json
from collections import Counter

import pytest

from attack_tagger.corpus import (
    BASELINE_DISTRIBUTION_PATH,
    Corpus,
    DistributionSpec,
    corpus_fingerprint,
    dump_corpus,
    ingest,
    label_problems,
    load_distribution_file,
    load_distribution_spec,
    resolve_orphans,
    stratified_indices,
    stratified_split,
    synth_corpus,
)
from attack_tagger.errors import EmptyCorpus, InvalidFraction, ParseError, UnknownTactic, ValidationError
from attack_tagger.vectorize import tokenize

from conftest import sentence, synth


def _jsonl(*docs) -> str:
    return "\n".join(json.dumps(d) for d in docs) + "\n"


def test_ingest_keeps_order_and_labels():
    data = _jsonl(
        {"text": "first one", "tactics": ["TA0007"], "techniques": ["T1082"], "source": "report-a"},
        {"text": "second one", "tactics": ["ta0002", "TA0005"]},
        {"text": "third one", "tactics": []},
    )
    corpus = ingest(data)
    assert corpus.texts() == ["first one", "second one", "third one"]
    assert corpus.sentences[0].technique_labels == frozenset({"T1082"})
    assert corpus.sentences[0].source == "report-a"
    assert corpus.sentences[1].tactic_labels == frozenset({"TA0002", "TA0005"})
    assert corpus.sentences[1].source == "unknown"
    assert corpus.unlabeled_count() == 1
    assert len(corpus.labeled()) == 2


def test_ingest_reports_line_numbers():
    data = _jsonl({"text": "fine", "tactics": ["TA0001"]}) + "{broken\n"
    with pytest.raises(ParseError) as exc:
        ingest(data)
    assert exc.value.line == 2
    assert "line 2" in str(exc.value)


def test_ingest_rejects_bad_ids_and_empty_text():
    with pytest.raises(ParseError):
        ingest(_jsonl({"text": "x y", "tactics": ["TA07"]}))
    with pytest.raises(ParseError):
        ingest(_jsonl({"text": "   ", "tactics": ["TA0001"]}))
    with pytest.raises(EmptyCorpus):
        ingest("\n\n")


def test_duplicate_labels_collapse():
    corpus = ingest(_jsonl({"text": "dup", "tactics": ["TA0001", "TA0001"]}))
    assert corpus.sentences[0].tactic_labels == frozenset({"TA0001"})


def test_dump_is_stable_and_reingestable():
    corpus = Corpus((sentence("alpha beta", ["TA0002", "TA0001"], ["T1001"]),))
    raw = dump_corpus(corpus)
    assert json.loads(raw.decode("utf-8"))["tactics"] == ["TA0001", "TA0002"]
    again = ingest(raw)
    assert dump_corpus(again) == raw
    assert corpus_fingerprint(again) == corpus_fingerprint(corpus)


def test_orphan_policy(tiny_taxonomy):
    corpus = Corpus((sentence("orphan text", [], ["T1004"]), sentence("normal text", ["TA0001"], ["T1001"])))
    assert resolve_orphans(corpus, tiny_taxonomy, "drop") is corpus
    inferred = resolve_orphans(corpus, tiny_taxonomy, "infer")
    assert inferred.sentences[0].tactic_labels == frozenset({"TA0002", "TA0003"})
    assert inferred.sentences[1] == corpus.sentences[1]
    with pytest.raises(ValidationError):
        resolve_orphans(corpus, tiny_taxonomy, "guess")


def test_label_problems(tiny_taxonomy):
    corpus = Corpus(
        (
            sentence("a b", ["TA0001"], ["T1003"]),
            sentence("c d", ["TA0099"], []),
            sentence("e f", ["TA0002"], ["T1004"]),
        )
    )
    problems = label_problems(corpus, tiny_taxonomy)
    assert problems == [
        "sentence 1: technique T1003 is not a child of any labeled tactic",
        "sentence 2: unknown tactic TA0099",
    ]


def test_stratified_indices_counts():
    keys = ["a"] * 10 + ["b"] * 5 + ["c"] * 1
    train, test = stratified_indices(keys, 0.8, seed=1)
    per_key = Counter(keys[i] for i in train)
    assert per_key == Counter({"a": 8, "b": 4, "c": 1})
    assert sorted(train + test) == list(range(len(keys)))
    assert train == sorted(train) and test == sorted(test)


def test_split_is_deterministic_and_validates(small_corpus):
    a = stratified_split(small_corpus, 0.8, 5)
    b = stratified_split(small_corpus, 0.8, 5)
    assert dump_corpus(a[0]) == dump_corpus(b[0])
    assert dump_corpus(a[1]) == dump_corpus(b[1])
    assert len(a[0]) + len(a[1]) == len(small_corpus)
    with pytest.raises(InvalidFraction):
        stratified_split(small_corpus, 1.0, 5)
    with pytest.raises(InvalidFraction):
        stratified_split(small_corpus, 0.0, 5)
    with pytest.raises(ValidationError):
        stratified_split(Corpus((sentence("no labels here"),)), 0.5, 0)


def test_split_fidelity_on_baseline_distribution(taxonomy):
    spec = load_distribution_file(BASELINE_DISTRIBUTION_PATH)
    assert spec.total == 14405
    assert spec.counts["TA0005"] == 2642 and spec.counts["TA0007"] == 2287
    corpus = synth_corpus(spec, taxonomy)
    assert len(corpus) == 14405
    train, _ = stratified_split(corpus, 0.8, 0)
    got = Counter(s.primary_tactic for s in train.sentences)
    for tactic, count in spec.counts.items():
        assert abs(got[tactic] - 0.8 * count) <= 1


def test_distribution_spec_validation():
    with pytest.raises(ValidationError):
        DistributionSpec(counts={"TA0001": 0}, overlap=0.5, seed=0)
    with pytest.raises(ValidationError):
        DistributionSpec(counts={"TA0001": 3}, overlap=1.5, seed=0)
    with pytest.raises(ValidationError):
        DistributionSpec(counts={"TA0001": -1, "TA0002": 4}, overlap=0.5, seed=0)
    with pytest.raises(ParseError):
        load_distribution_spec('{"counts": {"TA0001": 1}, "overlap": 0.5}')


def test_synth_follows_counts(taxonomy):
    spec = DistributionSpec(counts={"TA0007": 12, "TA0040": 3}, overlap=0.25, seed=9)
    corpus = synth_corpus(spec, taxonomy)
    assert Counter(s.primary_tactic for s in corpus.sentences) == Counter({"TA0007": 12, "TA0040": 3})
    for s in corpus.sentences:
        assert s.source == "synthetic"
        assert len(tokenize(s.text)) == 12
        (tactic,) = s.tactic_labels
        (technique,) = s.technique_labels
        assert taxonomy.validate_pair(tactic, technique)


def test_synth_is_deterministic(taxonomy):
    spec = DistributionSpec(counts={"TA0001": 5, "TA0002": 5}, overlap=0.5, seed=42)
    assert dump_corpus(synth_corpus(spec, taxonomy)) == dump_corpus(synth_corpus(spec, taxonomy))
    other = DistributionSpec(counts={"TA0001": 5, "TA0002": 5}, overlap=0.5, seed=43)
    assert dump_corpus(synth_corpus(other, taxonomy)) != dump_corpus(synth_corpus(spec, taxonomy))


def test_synth_overlap_zero_keeps_tactic_vocabularies_disjoint(taxonomy):
    corpus = synth(taxonomy, per_tactic=10, overlap=0.0, seed=1)
    vocab = {}
    for s in corpus.sentences:
        vocab.setdefault(s.primary_tactic, set()).update(tokenize(s.text))
    tactics = sorted(vocab)
    for i, a in enumerate(tactics):
        for b in tactics[i + 1:]:
            assert not (vocab[a] & vocab[b])


def test_synth_rejects_unknown_tactic(tiny_taxonomy):
    with pytest.raises(UnknownTactic):
        synth_corpus(DistributionSpec(counts={"TA0040": 2}, overlap=0.0, seed=0), tiny_taxonomy)
