from .sparse import SparseVector, l2_normalized
from .tokenizer import tokenize
from .vectorizer import (
    HASHED,
    VOCABULARY,
    Vectorizer,
    VectorizerConfig,
    fit_hashed_tfidf,
    fit_vectorizer,
    fit_vocabulary_tfidf,
    hash_token,
    transform,
    transform_many,
)

__all__ = [
    "HASHED",
    "VOCABULARY",
    "SparseVector",
    "Vectorizer",
    "VectorizerConfig",
    "fit_hashed_tfidf",
    "fit_vectorizer",
    "fit_vocabulary_tfidf",
    "hash_token",
    "l2_normalized",
    "tokenize",
    "transform",
    "transform_many",
]
