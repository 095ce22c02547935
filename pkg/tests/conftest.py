from __future__ import annotations

import json
from typing import Dict, Optional, Sequence

import pytest

from attack_tagger.corpus import Corpus, DistributionSpec, LabeledSentence, synth_corpus
from attack_tagger.hierarchy import TrainOptions, train_hierarchical
from attack_tagger.linear import Hyperparams
from attack_tagger.taxonomy import AttackTaxonomy, load_default_taxonomy, load_taxonomy
from attack_tagger.vectorize import VectorizerConfig

TINY_TAXONOMY = {
    "version": "tiny-v1",
    "tactics": [
        {"id": "TA0001", "name": "Initial Access"},
        {"id": "TA0002", "name": "Execution"},
        {"id": "TA0003", "name": "Persistence"},
    ],
    "techniques": [
        {"id": "T1001", "name": "Alpha", "tactic_ids": ["TA0001"]},
        {"id": "T1002", "name": "Beta", "tactic_ids": ["TA0001"]},
        {"id": "T1003", "name": "Gamma", "tactic_ids": ["TA0002"]},
        {"id": "T1004", "name": "Delta", "tactic_ids": ["TA0002", "TA0003"]},
        {"id": "T1005", "name": "Epsilon", "tactic_ids": ["TA0003"]},
    ],
}


def tiny_taxonomy_bytes() -> bytes:
    return json.dumps(TINY_TAXONOMY).encode("utf-8")


def sentence(text: str, tactics: Sequence[str] = (), techniques: Sequence[str] = ()) -> LabeledSentence:
    return LabeledSentence(text, frozenset(tactics), frozenset(techniques))


def synth(
    taxonomy: AttackTaxonomy,
    per_tactic: int,
    overlap: float = 0.0,
    seed: int = 0,
    tactics: Optional[Sequence[str]] = None,
) -> Corpus:
    counts: Dict[str, int] = {t: per_tactic for t in (tactics or taxonomy.sorted_tactics())}
    return synth_corpus(DistributionSpec(counts=counts, overlap=overlap, seed=seed), taxonomy)


@pytest.fixture(scope="session")
def taxonomy() -> AttackTaxonomy:
    return load_default_taxonomy()


@pytest.fixture(scope="session")
def tiny_taxonomy() -> AttackTaxonomy:
    return load_taxonomy(tiny_taxonomy_bytes())


@pytest.fixture(scope="session")
def small_corpus(taxonomy) -> Corpus:
    return synth(taxonomy, per_tactic=30, overlap=0.0, seed=7)


@pytest.fixture(scope="session")
def small_model(taxonomy, small_corpus):
    return train_hierarchical(
        small_corpus,
        taxonomy,
        VectorizerConfig(),
        Hyperparams(epochs=5, seed=3),
        TrainOptions(train_flat_technique=True),
    )


@pytest.fixture(scope="session")
def small_hashed_model(taxonomy, small_corpus):
    return train_hierarchical(
        small_corpus,
        taxonomy,
        VectorizerConfig(hash_bits=12, hash_seed=0),
        Hyperparams(epochs=5, seed=3),
    )
