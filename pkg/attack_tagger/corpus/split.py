from __future__ import annotations

import logging
from typing import Dict, List, Sequence, Tuple

from attack_tagger.corpus.model import Corpus
from attack_tagger.errors import EmptyCorpus, InvalidFraction, ValidationError
from attack_tagger.rng import SeedLike, make_rng

logger = logging.getLogger("attack_tagger.corpus")


def stratified_indices(keys: Sequence[str], train_fraction: float, seed: SeedLike) -> Tuple[List[int], List[int]]:
    """
    Partition positions 0..len(keys)-1 by stratum key.
    Strata are visited in ascending key order; each draws one permutation of its members
    (in input order) and sends the first round(fraction * size) to train, ties half-to-even.
    Both returned lists are in input order.
    """
    if not (0.0 < float(train_fraction) < 1.0):
        raise InvalidFraction(f"train_fraction must be in (0, 1), got {train_fraction}")
    if not keys:
        raise EmptyCorpus("Nothing to split")

    strata: Dict[str, List[int]] = {}
    for i, k in enumerate(keys):
        strata.setdefault(k, []).append(i)

    rng = make_rng(seed)
    train: List[int] = []
    for key in sorted(strata):
        members = strata[key]
        take = round(float(train_fraction) * len(members))
        order = rng.permutation(len(members))
        train.extend(members[j] for j in order[:take])

    train_set = set(train)
    test = [i for i in range(len(keys)) if i not in train_set]
    return sorted(train), test


def stratified_split(corpus: Corpus, train_fraction: float, seed: int) -> Tuple[Corpus, Corpus]:
    """
    Stratify on each sentence's lexicographically smallest tactic label.
    Unlabeled sentences must be filtered by the caller.
    """
    if not (0.0 < float(train_fraction) < 1.0):
        raise InvalidFraction(f"train_fraction must be in (0, 1), got {train_fraction}")
    if len(corpus) == 0:
        raise EmptyCorpus("Cannot split an empty corpus")
    keys: List[str] = []
    for i, s in enumerate(corpus.sentences, start=1):
        if s.primary_tactic is None:
            raise ValidationError(f"sentence {i} has no tactic label; filter unlabeled sentences before splitting")
        keys.append(s.primary_tactic)

    train_idx, test_idx = stratified_indices(keys, train_fraction, seed)
    logger.info("split %s sentences into %s train / %s test", len(corpus), len(train_idx), len(test_idx))
    train = Corpus(tuple(corpus.sentences[i] for i in train_idx), corpus.taxonomy_version)
    test = Corpus(tuple(corpus.sentences[i] for i in test_idx), corpus.taxonomy_version)
    return train, test
