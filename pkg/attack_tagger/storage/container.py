from __future__ import annotations

import logging
import struct
from pathlib import Path
from typing import Any, Callable, Dict, List, Tuple, TypeVar, Union

import numpy as np
from scipy import sparse

from attack_tagger.errors import AttackTaggerError, FormatError, VersionMismatch
from attack_tagger.hierarchy import HierarchicalModel
from attack_tagger.linear import Hyperparams, LinearModel, TrainingMeta
from attack_tagger.taxonomy import load_taxonomy
from attack_tagger.vectorize import HASHED, VOCABULARY, Vectorizer
from attack_tagger.vectorize.vectorizer import MAX_HASH_BITS, MIN_HASH_BITS

logger = logging.getLogger("attack_tagger.storage")

MAGIC = b"ATKTAG1\0"
FORMAT_VERSION = 1

ROLE_TAXONOMY = "taxonomy"
ROLE_VECTORIZER = "vectorizer"
ROLE_TACTIC = "tactic"
ROLE_TECHNIQUE_PREFIX = "technique:"
ROLE_FLAT = "technique-flat"
ROLE_MODEL = "model"

_KIND_CODES = {VOCABULARY: 0, HASHED: 1}
_KIND_NAMES = {v: k for k, v in _KIND_CODES.items()}

Stored = Union[LinearModel, HierarchicalModel]
T = TypeVar("T")


class _Writer:
    """
    Little-endian primitives. Strings are u32 byte length + UTF-8.
    """

    def __init__(self):
        self._buf = bytearray()

    def u8(self, v: int) -> None:
        self._buf += struct.pack("<B", int(v))

    def u32(self, v: int) -> None:
        self._buf += struct.pack("<I", int(v))

    def u64(self, v: int) -> None:
        self._buf += struct.pack("<Q", int(v))

    def f64(self, v: float) -> None:
        self._buf += struct.pack("<d", float(v))

    def string(self, s: str) -> None:
        raw = str(s).encode("utf-8")
        self.u32(len(raw))
        self._buf += raw

    def raw(self, b: bytes) -> None:
        self._buf += b

    def f64_array(self, a: np.ndarray) -> None:
        self._buf += np.ascontiguousarray(a, dtype="<f8").tobytes()

    def u32_array(self, a: np.ndarray) -> None:
        self._buf += np.ascontiguousarray(a, dtype="<u4").tobytes()

    def getvalue(self) -> bytes:
        return bytes(self._buf)


class _Reader:
    def __init__(self, data: bytes, what: str = "container"):
        self._data = bytes(data)
        self._pos = 0
        self._what = what

    def _take(self, n: int) -> bytes:
        if n < 0 or self._pos + n > len(self._data):
            raise FormatError(f"{self._what} is truncated at byte {self._pos}")
        chunk = self._data[self._pos:self._pos + n]
        self._pos += n
        return chunk

    def u8(self) -> int:
        return struct.unpack("<B", self._take(1))[0]

    def u32(self) -> int:
        return struct.unpack("<I", self._take(4))[0]

    def u64(self) -> int:
        return struct.unpack("<Q", self._take(8))[0]

    def f64(self) -> float:
        return struct.unpack("<d", self._take(8))[0]

    def string(self) -> str:
        raw = self._take(self.u32())
        try:
            return raw.decode("utf-8")
        except UnicodeDecodeError as e:
            raise FormatError(f"{self._what} holds a string that is not UTF-8") from e

    def raw(self, n: int) -> bytes:
        return self._take(n)

    def f64_array(self, count: int) -> np.ndarray:
        return np.frombuffer(self._take(8 * count), dtype="<f8").astype(np.float64)

    def u32_array(self, count: int) -> np.ndarray:
        return np.frombuffer(self._take(4 * count), dtype="<u4").astype(np.int64)

    def expect_end(self) -> None:
        if self._pos != len(self._data):
            raise FormatError(f"{self._what} has {len(self._data) - self._pos} unexpected trailing bytes")


def _build(factory: Callable[..., T], what: str, *args: Any, **kwargs: Any) -> T:
    # Constructor checks on decoded data surface as FormatError.
    try:
        return factory(*args, **kwargs)
    except FormatError:
        raise
    except AttackTaggerError as e:
        raise FormatError(f"{what} is invalid: {e}") from e


def _encode_vectorizer(v: Vectorizer) -> bytes:
    w = _Writer()
    w.u8(_KIND_CODES[v.kind])
    if v.kind == VOCABULARY:
        vocab = v.vocabulary or {}
        w.u32(len(vocab))
        for token in sorted(vocab):
            w.string(token)
            w.u32(vocab[token])
            w.f64(v.idf[vocab[token]])
    else:
        # Hashed kind: numbers only, never a token.
        w.u8(v.hash_bits)
        w.u32(v.hash_seed)
        w.f64_array(v.idf)
    return w.getvalue()


def _decode_vectorizer(payload: bytes) -> Vectorizer:
    r = _Reader(payload, "vectorizer section")
    code = r.u8()
    if code not in _KIND_NAMES:
        raise FormatError(f"unknown vectorizer kind code {code}")
    if _KIND_NAMES[code] == VOCABULARY:
        count = r.u32()
        vocab: Dict[str, int] = {}
        idf = np.zeros(count, dtype=np.float64)
        for _ in range(count):
            token = r.string()
            index = r.u32()
            if index >= count:
                raise FormatError(f"vocabulary index {index} out of range")
            vocab[token] = index
            idf[index] = r.f64()
        r.expect_end()
        return _build(Vectorizer, "vectorizer section", kind=VOCABULARY, idf=idf, vocabulary=vocab)
    bits = r.u8()
    if not (MIN_HASH_BITS <= bits <= MAX_HASH_BITS):
        raise FormatError(f"hash bits {bits} out of range [{MIN_HASH_BITS}, {MAX_HASH_BITS}]")
    seed = r.u32()
    idf = r.f64_array(1 << bits)
    r.expect_end()
    return _build(Vectorizer, "vectorizer section", kind=HASHED, idf=idf, hash_bits=bits, hash_seed=seed)


def _encode_linear(m: LinearModel) -> bytes:
    w = _Writer()
    w.u32(m.class_count)
    w.u32(m.dimension)
    for c in m.classes:
        w.string(c)
    w.f64_array(m.bias)
    weights = m.weights
    for i in range(m.class_count):
        lo, hi = int(weights.indptr[i]), int(weights.indptr[i + 1])
        w.u32(hi - lo)
        w.u32_array(weights.indices[lo:hi])
        w.f64_array(weights.data[lo:hi])
    hp = m.meta.hyperparams
    w.f64(hp.eta0)
    w.f64(hp.alpha)
    w.u32(hp.epochs)
    w.u64(hp.seed)
    w.string(m.meta.fingerprint)
    return w.getvalue()


def _decode_linear(payload: bytes, role: str) -> LinearModel:
    r = _Reader(payload, f"{role} section")
    count = r.u32()
    dimension = r.u32()
    classes = tuple(r.string() for _ in range(count))
    bias = r.f64_array(count)
    indptr = [0]
    indices: List[np.ndarray] = []
    data: List[np.ndarray] = []
    for i in range(count):
        nnz = r.u32()
        row = r.u32_array(nnz)
        values = r.f64_array(nnz)
        if nnz and (int(row[-1]) >= dimension or np.any(np.diff(row) <= 0)):
            raise FormatError(f"{role} section: row {i} column indices are out of range or not strictly ascending")
        if not np.all(np.isfinite(values)):
            raise FormatError(f"{role} section: row {i} holds non-finite weights")
        indices.append(row)
        data.append(values)
        indptr.append(indptr[-1] + nnz)
    if not np.all(np.isfinite(bias)):
        raise FormatError(f"{role} section: non-finite bias")
    hp = _build(Hyperparams, f"{role} section", eta0=r.f64(), alpha=r.f64(), epochs=r.u32(), seed=r.u64())
    fingerprint = r.string()
    r.expect_end()
    weights = sparse.csr_matrix(
        (
            np.concatenate(data) if data else np.zeros(0),
            np.concatenate(indices) if indices else np.zeros(0, dtype=np.int64),
            np.asarray(indptr, dtype=np.int64),
        ),
        shape=(count, dimension),
    )
    return _build(LinearModel, f"{role} section", classes, weights, bias, dimension, TrainingMeta(hp, fingerprint))


def _sections(obj: Stored) -> Tuple[str, List[Tuple[str, bytes]]]:
    if isinstance(obj, LinearModel):
        return "", [(ROLE_MODEL, _encode_linear(obj))]
    if not isinstance(obj, HierarchicalModel):
        raise TypeError(f"cannot store {type(obj).__name__}")
    if obj.tactic_model is None:
        raise FormatError("cannot store a hierarchical model without a tactic model")
    sections = [
        (ROLE_TAXONOMY, obj.taxonomy.to_json_bytes()),
        (ROLE_VECTORIZER, _encode_vectorizer(obj.vectorizer)),
        (ROLE_TACTIC, _encode_linear(obj.tactic_model)),
    ]
    for tactic, model in sorted(obj.technique_models.items()):
        sections.append((ROLE_TECHNIQUE_PREFIX + tactic, _encode_linear(model)))
    if obj.flat_technique_model is not None:
        sections.append((ROLE_FLAT, _encode_linear(obj.flat_technique_model)))
    return obj.taxonomy.version, sections


def save_model(obj: Stored) -> bytes:
    """
    Serialize a LinearModel or a HierarchicalModel. Identical models give identical bytes.
    Layout: docs/FORMATS.md.
    """
    taxonomy_version, sections = _sections(obj)
    w = _Writer()
    w.raw(MAGIC)
    w.u32(FORMAT_VERSION)
    w.string(taxonomy_version)
    w.u32(len(sections))
    for role, payload in sections:
        w.string(role)
        w.u64(len(payload))
        w.raw(payload)
    return w.getvalue()


def load_model(data: bytes) -> Stored:
    if bytes(data[: len(MAGIC)]) != MAGIC:
        raise FormatError("not a model container (bad magic header)")
    r = _Reader(data)
    r.raw(len(MAGIC))
    version = r.u32()
    if version != FORMAT_VERSION:
        raise VersionMismatch(f"container format version {version}, this build reads version {FORMAT_VERSION}")
    taxonomy_version = r.string()

    sections: Dict[str, bytes] = {}
    for _ in range(r.u32()):
        role = r.string()
        payload = r.raw(r.u64())
        if role in sections:
            raise FormatError(f"duplicate section {role!r}")
        sections[role] = payload
    r.expect_end()

    if set(sections) == {ROLE_MODEL}:
        return _decode_linear(sections[ROLE_MODEL], ROLE_MODEL)

    for required in (ROLE_TAXONOMY, ROLE_VECTORIZER, ROLE_TACTIC):
        if required not in sections:
            raise FormatError(f"container lacks the {required!r} section")
    try:
        taxonomy = load_taxonomy(sections[ROLE_TAXONOMY])
    except AttackTaggerError as e:
        raise FormatError(f"embedded taxonomy is invalid: {e}") from e
    if taxonomy.version != taxonomy_version:
        raise FormatError(f"header taxonomy {taxonomy_version!r} != embedded taxonomy {taxonomy.version!r}")

    technique_models: Dict[str, LinearModel] = {}
    flat = None
    for role, payload in sections.items():
        if role.startswith(ROLE_TECHNIQUE_PREFIX):
            technique_models[role[len(ROLE_TECHNIQUE_PREFIX):]] = _decode_linear(payload, role)
        elif role == ROLE_FLAT:
            flat = _decode_linear(payload, role)
        elif role not in (ROLE_TAXONOMY, ROLE_VECTORIZER, ROLE_TACTIC):
            raise FormatError(f"unknown section {role!r}")

    return _build(
        HierarchicalModel,
        "container",
        vectorizer=_decode_vectorizer(sections[ROLE_VECTORIZER]),
        tactic_model=_decode_linear(sections[ROLE_TACTIC], ROLE_TACTIC),
        technique_models=technique_models,
        taxonomy=taxonomy,
        flat_technique_model=flat,
    )


def load_hierarchical(data: bytes) -> HierarchicalModel:
    obj = load_model(data)
    if not isinstance(obj, HierarchicalModel):
        raise FormatError("container holds a single linear model, not a hierarchical model")
    return obj


def save_model_file(obj: Stored, path: Union[str, Path]) -> None:
    p = Path(path)
    p.write_bytes(save_model(obj))
    logger.info("wrote model container %s", p)


def load_model_file(path: Union[str, Path]) -> HierarchicalModel:
    p = Path(path)
    try:
        return load_hierarchical(p.read_bytes())
    except FormatError as e:
        raise FormatError(f"{p}: {e}") from e
