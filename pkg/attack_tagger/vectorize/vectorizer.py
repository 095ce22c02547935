from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import sparse
from sklearn.feature_extraction.text import CountVectorizer, TfidfTransformer
from sklearn.utils import murmurhash3_32

from attack_tagger.errors import DimensionMismatch, EmptyVocabulary, NotFitted, ValidationError
from attack_tagger.vectorize.sparse import SparseVector, l2_normalized
from attack_tagger.vectorize.tokenizer import tokenize

logger = logging.getLogger("attack_tagger.vectorize")

VOCABULARY = "vocabulary"
HASHED = "hashed"
KINDS = (VOCABULARY, HASHED)

MIN_HASH_BITS = 8
MAX_HASH_BITS = 26
MAX_HASH_SEED = 2**32 - 1
SIGN_BIT = 1 << 31


@dataclass(frozen=True)
class VectorizerConfig:
    """
    hash_bits=None selects the vocabulary kind.
    """

    hash_bits: Optional[int] = None
    hash_seed: int = 0

    @property
    def kind(self) -> str:
        return VOCABULARY if self.hash_bits is None else HASHED


@dataclass(frozen=True, eq=False)
class Vectorizer:
    """
    Fitted TF-IDF feature space.

    vocabulary kind: `vocabulary` maps token -> index, indices assigned in lexicographic token order.
    hashed kind: no token is kept; index and sign come from MurmurHash3 of the token.
    `idf` is None until fitted.
    """

    kind: str
    idf: Optional[np.ndarray] = None
    vocabulary: Optional[Dict[str, int]] = None
    hash_bits: int = 0
    hash_seed: int = 0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValidationError(f"Unknown vectorizer kind: {self.kind}")
        if self.kind == VOCABULARY:
            if self.vocabulary is None:
                raise ValidationError("vocabulary vectorizer needs a vocabulary")
            if sorted(self.vocabulary.values()) != list(range(len(self.vocabulary))):
                raise ValidationError("vocabulary indices must be 0..|vocabulary|-1")
        else:
            _check_hash_params(self.hash_bits, self.hash_seed)
        if self.idf is not None:
            idf = np.asarray(self.idf, dtype=np.float64)
            if idf.shape != (self.dimension,):
                raise DimensionMismatch(f"idf has length {idf.size}, expected {self.dimension}")
            if not np.all(np.isfinite(idf)):
                raise ValidationError("idf values must be finite")
            if idf.size and float(idf.min()) < 1.0:
                raise ValidationError("idf values must be >= 1")
            idf.setflags(write=False)
            object.__setattr__(self, "idf", idf)

    @property
    def dimension(self) -> int:
        if self.kind == VOCABULARY:
            return len(self.vocabulary or {})
        return 1 << int(self.hash_bits)

    @property
    def fitted(self) -> bool:
        return self.idf is not None

    def structurally_equal(self, other: "Vectorizer") -> bool:
        if not isinstance(other, Vectorizer):
            return False
        if (self.kind, self.hash_bits, self.hash_seed) != (other.kind, other.hash_bits, other.hash_seed):
            return False
        if self.vocabulary != other.vocabulary:
            return False
        if self.idf is None or other.idf is None:
            return self.idf is None and other.idf is None
        return np.array_equal(self.idf, other.idf)


def _check_hash_params(hash_bits: int, hash_seed: int) -> None:
    if not (MIN_HASH_BITS <= int(hash_bits) <= MAX_HASH_BITS):
        raise ValidationError(f"hash_bits must be in [{MIN_HASH_BITS}, {MAX_HASH_BITS}], got {hash_bits}")
    if not (0 <= int(hash_seed) <= MAX_HASH_SEED):
        raise ValidationError(f"hash_seed must be a 32-bit unsigned integer, got {hash_seed}")


@lru_cache(maxsize=1 << 16)
def hash_token(token: str, hash_bits: int, hash_seed: int) -> Tuple[int, int]:
    """
    (index, sign) of `token`: index = h mod 2^bits, sign = -1 when bit 31 of h is set.
    """
    h = int(murmurhash3_32(token, seed=int(hash_seed), positive=True))
    return h & ((1 << int(hash_bits)) - 1), (-1 if h & SIGN_BIT else 1)


def fit_vocabulary_tfidf(train_texts: Sequence[str]) -> Vectorizer:
    counter = CountVectorizer(tokenizer=tokenize, lowercase=False, token_pattern=None)
    try:
        counts = counter.fit_transform([str(t) for t in train_texts])
    except ValueError as e:
        # sklearn reports "empty vocabulary" both for no documents and for no tokens.
        raise EmptyVocabulary("Training texts yield no tokens of length >= 2") from e

    names = counter.get_feature_names_out()
    # CountVectorizer assigns column indices in sorted feature order.
    vocabulary = {str(tok): i for i, tok in enumerate(names)}

    idf = TfidfTransformer(smooth_idf=True).fit(counts).idf_
    logger.info("fitted vocabulary tf-idf: %s texts, %s tokens", counts.shape[0], len(vocabulary))
    return Vectorizer(kind=VOCABULARY, idf=np.asarray(idf, dtype=np.float64), vocabulary=vocabulary)


def _hashed_presence(texts: Sequence[str], hash_bits: int, hash_seed: int) -> sparse.csr_matrix:
    indptr = [0]
    indices: List[int] = []
    for text in texts:
        present = sorted({hash_token(t, hash_bits, hash_seed)[0] for t in tokenize(text)})
        indices.extend(present)
        indptr.append(len(indices))
    data = np.ones(len(indices), dtype=np.float64)
    return sparse.csr_matrix(
        (data, np.asarray(indices, dtype=np.int64), np.asarray(indptr, dtype=np.int64)),
        shape=(len(texts), 1 << int(hash_bits)),
    )


def fit_hashed_tfidf(train_texts: Sequence[str], hash_bits: int, hash_seed: int = 0) -> Vectorizer:
    """
    Document frequency is counted per hashed index: a text contributes once to an index
    if any of its tokens lands there.
    """
    _check_hash_params(hash_bits, hash_seed)
    texts = [str(t) for t in train_texts]
    if not texts:
        raise ValidationError("fit_hashed_tfidf needs at least one training text")
    presence = _hashed_presence(texts, int(hash_bits), int(hash_seed))
    idf = TfidfTransformer(smooth_idf=True).fit(presence).idf_
    logger.info("fitted hashed tf-idf: %s texts, %s bits, %s active indices", len(texts), hash_bits, int(np.unique(presence.indices).size))
    return Vectorizer(
        kind=HASHED,
        idf=np.asarray(idf, dtype=np.float64),
        hash_bits=int(hash_bits),
        hash_seed=int(hash_seed),
    )


def fit_vectorizer(train_texts: Sequence[str], config: VectorizerConfig) -> Vectorizer:
    if config.kind == HASHED:
        return fit_hashed_tfidf(train_texts, int(config.hash_bits), int(config.hash_seed))
    return fit_vocabulary_tfidf(train_texts)


def transform(v: Vectorizer, text: str) -> SparseVector:
    if not v.fitted:
        raise NotFitted("Vectorizer has no idf weights; fit it first")
    tokens = tokenize(text)
    if v.kind == VOCABULARY:
        vocab = v.vocabulary or {}
        hits = np.asarray([vocab[t] for t in tokens if t in vocab], dtype=np.int64)
        if hits.size == 0:
            return SparseVector.zeros(v.dimension)
        idx, counts = np.unique(hits, return_counts=True)
        return l2_normalized(v.dimension, idx, counts.astype(np.float64) * v.idf[idx])

    if not tokens:
        return SparseVector.zeros(v.dimension)
    pairs = [hash_token(t, v.hash_bits, v.hash_seed) for t in tokens]
    raw_idx = np.asarray([p[0] for p in pairs], dtype=np.int64)
    signs = np.asarray([p[1] for p in pairs], dtype=np.float64)
    idx, inverse = np.unique(raw_idx, return_inverse=True)
    summed = np.bincount(inverse.ravel(), weights=signs, minlength=idx.size)
    return l2_normalized(v.dimension, idx, summed * v.idf[idx])


def transform_many(v: Vectorizer, texts: Sequence[str]) -> List[SparseVector]:
    return [transform(v, t) for t in texts]
