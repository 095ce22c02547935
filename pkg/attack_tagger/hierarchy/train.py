from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

from attack_tagger.corpus import Corpus, stratified_indices
from attack_tagger.errors import AttackTaggerError, EmptyCorpus, ValidationError
from attack_tagger.hierarchy.model import HierarchicalModel
from attack_tagger.linear import Hyperparams, LinearModel, train_multiclass
from attack_tagger.taxonomy import AttackTaxonomy
from attack_tagger.vectorize import SparseVector, VectorizerConfig, fit_vectorizer, transform_many

logger = logging.getLogger("attack_tagger.hierarchy")

TECHNIQUE_SPLITS = ("global", "fresh")


@dataclass(frozen=True)
class TrainOptions:
    """
    technique_split:
      global  every training sentence of a tactic feeds its technique model
      fresh   a seeded, technique-stratified `technique_fraction` subset per tactic
    init: warm start from a prior model; its vectorizer is reused as is.
    """

    train_flat_technique: bool = False
    technique_split: str = "global"
    technique_fraction: float = 0.8
    max_workers: int = 1
    init: Optional[HierarchicalModel] = None

    def __post_init__(self):
        if self.technique_split not in TECHNIQUE_SPLITS:
            raise ValidationError(f"Unknown technique split {self.technique_split!r}; expected one of {TECHNIQUE_SPLITS}")
        if int(self.max_workers) < 1:
            raise ValidationError("max_workers must be >= 1")


Sample = Tuple[SparseVector, str]


def _train(owner: str, samples: Sequence[Sample], hp: Hyperparams, init: Optional[LinearModel]) -> LinearModel:
    try:
        return train_multiclass([s[0] for s in samples], [s[1] for s in samples], hp, init=init)
    except AttackTaggerError as e:
        raise type(e)(f"{owner}: {e}") from e


def _technique_samples(
    tactic: str,
    vectors: Sequence[SparseVector],
    corpus: Corpus,
    taxonomy: AttackTaxonomy,
) -> List[Sample]:
    out: List[Sample] = []
    for x, s in zip(vectors, corpus.sentences):
        if tactic not in s.tactic_labels:
            continue
        for te in sorted(s.technique_labels):
            if taxonomy.validate_pair(tactic, te):
                out.append((x, te))
    return out


def _fresh_subset(tactic: str, samples: List[Sample], fraction: float, seed: int) -> List[Sample]:
    if len(samples) < 2:
        return samples
    keep, _ = stratified_indices([te for _, te in samples], fraction, [int(seed), int(tactic[2:])])
    return [samples[i] for i in keep]


def train_hierarchical(
    corpus: Corpus,
    taxonomy: AttackTaxonomy,
    vec_config: VectorizerConfig,
    hp: Hyperparams,
    options: Optional[TrainOptions] = None,
) -> HierarchicalModel:
    """
    Fit the vectorizer once on all training texts, then:
      - the tactic model on one (vector, tactic) pair per tactic label,
      - per tactic, a technique model over that tactic's (vector, technique) pairs whenever
        at least two distinct techniques occur,
      - optionally the flat technique model over every (vector, technique) pair.
    Sentences without tactic labels are ignored. Labels outside `taxonomy` are skipped.
    """
    options = options or TrainOptions()
    labeled = corpus.labeled()
    if len(labeled) == 0:
        raise EmptyCorpus("No sentence in the training corpus carries a tactic label")
    if len(labeled) < len(corpus):
        logger.warning("ignoring %s sentences without tactic labels", len(corpus) - len(labeled))

    init = options.init
    if init is not None:
        if init.taxonomy.version != taxonomy.version:
            logger.warning("warm start from taxonomy %s into %s", init.taxonomy.version, taxonomy.version)
        vectorizer = init.vectorizer
        logger.info("warm start: reusing the %s vectorizer (dimension %s)", vectorizer.kind, vectorizer.dimension)
    else:
        vectorizer = fit_vectorizer(labeled.texts(), vec_config)
    vectors = transform_many(vectorizer, labeled.texts())

    tactic_samples: List[Sample] = []
    skipped = 0
    for x, s in zip(vectors, labeled.sentences):
        for ta in sorted(s.tactic_labels):
            if ta in taxonomy.tactics:
                tactic_samples.append((x, ta))
            else:
                skipped += 1
    if skipped:
        logger.warning("skipped %s tactic labels not in taxonomy %s", skipped, taxonomy.version)
    if not tactic_samples:
        raise EmptyCorpus("No tactic label of the training corpus is in the taxonomy")
    tactic_model = _train("tactic model", tactic_samples, hp, init.tactic_model if init else None)

    def fit_one(tactic: str) -> Optional[LinearModel]:
        samples = _technique_samples(tactic, vectors, labeled, taxonomy)
        if options.technique_split == "fresh":
            samples = _fresh_subset(tactic, samples, options.technique_fraction, hp.seed)
        distinct = {te for _, te in samples}
        if len(distinct) < 2:
            logger.info("tactic %s: %s distinct techniques, no technique model", tactic, len(distinct))
            return None
        prior = init.technique_models.get(tactic) if init else None
        return _train(f"tactic {tactic}", samples, hp, prior)

    tactics = list(tactic_model.classes)
    if int(options.max_workers) > 1 and len(tactics) > 1:
        with ThreadPoolExecutor(max_workers=int(options.max_workers)) as pool:
            fitted = list(pool.map(fit_one, tactics))
    else:
        fitted = [fit_one(t) for t in tactics]
    technique_models: Dict[str, LinearModel] = {t: m for t, m in zip(tactics, fitted) if m is not None}

    flat: Optional[LinearModel] = None
    if options.train_flat_technique:
        flat_samples = [
            (x, te)
            for x, s in zip(vectors, labeled.sentences)
            for te in sorted(s.technique_labels)
            if te in taxonomy.techniques
        ]
        flat = _train("flat technique model", flat_samples, hp, init.flat_technique_model if init else None)

    logger.info(
        "trained hierarchy: %s tactics, %s technique models%s",
        tactic_model.class_count,
        len(technique_models),
        ", flat technique model" if flat is not None else "",
    )
    return HierarchicalModel(
        vectorizer=vectorizer,
        tactic_model=tactic_model,
        technique_models=technique_models,
        taxonomy=taxonomy,
        flat_technique_model=flat,
    )
