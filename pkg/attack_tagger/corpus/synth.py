from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import numpy as np

from attack_tagger.corpus.model import Corpus, DistributionSpec, LabeledSentence
from attack_tagger.errors import UnknownTactic
from attack_tagger.rng import make_rng
from attack_tagger.taxonomy import AttackTaxonomy, TacticId, TechniqueId

logger = logging.getLogger("attack_tagger.corpus")

BASELINE_DISTRIBUTION_PATH = Path(__file__).resolve().parent / "data" / "baseline-distribution.json"

# Pseudo-words are 5 consonant-vowel syllables. No bundled taxonomy name contains a run that long,
# so a serialized model never holds a synthetic token by coincidence.
_CONSONANTS = "bdgkmnprstvz"
_VOWELS = "aeiou"
_SYLLABLES = [c + v for c in _CONSONANTS for v in _VOWELS]
_SYLLABLES_PER_WORD = 5

SHARED_POOL_SIZE = 300
TACTIC_POOL_SIZE = 40
TECHNIQUE_POOL_SIZE = 8


@dataclass(frozen=True)
class TokenPools:
    shared: Tuple[str, ...]
    tactic: Dict[TacticId, Tuple[str, ...]]
    technique: Dict[Tuple[TacticId, TechniqueId], Tuple[str, ...]]


def _pseudo_words(rng: np.random.Generator, count: int) -> List[str]:
    seen: Dict[str, None] = {}
    while len(seen) < count:
        draws = rng.integers(0, len(_SYLLABLES), size=(max(64, count - len(seen)), _SYLLABLES_PER_WORD))
        for row in draws:
            seen.setdefault("".join(_SYLLABLES[int(j)] for j in row), None)
            if len(seen) >= count:
                break
    return list(seen)


def build_pools(spec: DistributionSpec, taxonomy: AttackTaxonomy, rng: np.random.Generator) -> TokenPools:
    tactics = sorted(spec.counts)
    techniques = {t: sorted(taxonomy.techniques_for(t)) for t in tactics}
    needed = SHARED_POOL_SIZE + TACTIC_POOL_SIZE * len(tactics)
    needed += TECHNIQUE_POOL_SIZE * sum(len(v) for v in techniques.values())
    words = _pseudo_words(rng, needed)

    pos = 0

    def take(n: int) -> Tuple[str, ...]:
        nonlocal pos
        chunk = tuple(words[pos:pos + n])
        pos += n
        return chunk

    shared = take(SHARED_POOL_SIZE)
    tactic_pools: Dict[TacticId, Tuple[str, ...]] = {}
    technique_pools: Dict[Tuple[TacticId, TechniqueId], Tuple[str, ...]] = {}
    for tactic in tactics:
        tactic_pools[tactic] = take(TACTIC_POOL_SIZE)
        for technique in techniques[tactic]:
            technique_pools[(tactic, technique)] = take(TECHNIQUE_POOL_SIZE)
    return TokenPools(shared=shared, tactic=tactic_pools, technique=technique_pools)


def synth_corpus(spec: DistributionSpec, taxonomy: AttackTaxonomy) -> Corpus:
    """
    Deterministic fixture corpus following `spec`.

    Per sentence: round(overlap * L) tokens come from the shared pool; the rest is split between
    the tactic's own pool and the pool of one technique drawn uniformly from the tactic's children
    (every technique pool is private to its (tactic, technique) pair, so overlap 0 keeps tactic
    vocabularies disjoint).
    """
    for tactic in spec.counts:
        if tactic not in taxonomy.tactics:
            raise UnknownTactic(f"Distribution references unknown tactic {tactic}")

    rng = make_rng(int(spec.seed))
    pools = build_pools(spec, taxonomy, rng)
    length = int(spec.tokens_per_sentence)
    k_shared = int(round(float(spec.overlap) * length))
    rest = length - k_shared

    sentences: List[LabeledSentence] = []
    for tactic in sorted(spec.counts):
        children = sorted(taxonomy.techniques_for(tactic))
        general = pools.tactic[tactic]
        for _ in range(int(spec.counts[tactic])):
            technique: Optional[TechniqueId] = None
            if children:
                technique = children[int(rng.integers(0, len(children)))]
            k_tech = (rest + 1) // 2 if technique is not None else 0
            k_general = rest - k_tech

            tokens: List[str] = []
            tokens.extend(pools.shared[int(j)] for j in rng.integers(0, len(pools.shared), size=k_shared))
            tokens.extend(general[int(j)] for j in rng.integers(0, len(general), size=k_general))
            if technique is not None:
                tech_pool = pools.technique[(tactic, technique)]
                tokens.extend(tech_pool[int(j)] for j in rng.integers(0, len(tech_pool), size=k_tech))
            order = rng.permutation(len(tokens))

            sentences.append(
                LabeledSentence(
                    text=" ".join(tokens[int(j)] for j in order) + ".",
                    tactic_labels=frozenset([tactic]),
                    technique_labels=frozenset([technique]) if technique is not None else frozenset(),
                    source="synthetic",
                )
            )

    logger.info("synthesized %s sentences over %s tactics (overlap %.2f)", len(sentences), len(spec.counts), spec.overlap)
    return Corpus(tuple(sentences), taxonomy.version)
