from .model import Corpus, DistributionSpec, LabeledSentence
from .loader import (
    ORPHAN_POLICIES,
    corpus_fingerprint,
    dump_corpus,
    ingest,
    label_problems,
    load_corpus_file,
    load_distribution_file,
    load_distribution_spec,
    resolve_orphans,
    write_corpus_file,
)
from .split import stratified_indices, stratified_split
from .synth import BASELINE_DISTRIBUTION_PATH, TokenPools, build_pools, synth_corpus

__all__ = [
    "Corpus",
    "DistributionSpec",
    "LabeledSentence",
    "ORPHAN_POLICIES",
    "corpus_fingerprint",
    "dump_corpus",
    "ingest",
    "label_problems",
    "load_corpus_file",
    "load_distribution_file",
    "load_distribution_spec",
    "resolve_orphans",
    "write_corpus_file",
    "stratified_indices",
    "stratified_split",
    "BASELINE_DISTRIBUTION_PATH",
    "TokenPools",
    "build_pools",
    "synth_corpus",
]
