from __future__ import annotations

import asyncio
import json
import struct

import numpy as np
import pytest
from scipy import sparse

from attack_tagger.corpus import Corpus
from attack_tagger.errors import FormatError, VersionMismatch
from attack_tagger.hierarchy import HierarchicalModel, predict_pairs, train_hierarchical
from attack_tagger.linear import Hyperparams, LinearModel, TrainingMeta
from attack_tagger.storage import (
    FORMAT_VERSION,
    MAGIC,
    AuditLog,
    load_hierarchical,
    load_model,
    load_model_file,
    save_model,
    save_model_file,
)
from attack_tagger.vectorize import VectorizerConfig, tokenize

from conftest import sentence


def _linear() -> LinearModel:
    weights = sparse.csr_matrix(np.array([[0.0, 1.5, 0.0, -2.0], [0.25, 0.0, 0.0, 0.0]]))
    return LinearModel(
        classes=("TA0001", "TA0002"),
        weights=weights,
        bias=np.array([0.5, -0.125]),
        dimension=4,
        meta=TrainingMeta(Hyperparams(eta0=0.05, alpha=0.001, epochs=7, seed=2**63 + 5), "abc123"),
    )


def _header_end(data: bytes) -> int:
    (length,) = struct.unpack_from("<I", data, len(MAGIC) + 4)
    return len(MAGIC) + 4 + 4 + length


def _with_extra_section(data: bytes, role: str, payload: bytes) -> bytes:
    at = _header_end(data)
    (count,) = struct.unpack_from("<I", data, at)
    raw_role = role.encode("utf-8")
    extra = struct.pack("<I", len(raw_role)) + raw_role + struct.pack("<Q", len(payload)) + payload
    return data[:at] + struct.pack("<I", count + 1) + data[at + 4:] + extra


def test_linear_round_trip():
    model = _linear()
    data = save_model(model)
    assert data.startswith(MAGIC)
    loaded = load_model(data)
    assert isinstance(loaded, LinearModel)
    assert loaded.structurally_equal(model)
    assert loaded.meta.hyperparams.seed == 2**63 + 5
    assert save_model(loaded) == data


@pytest.mark.parametrize("fixture", ["small_model", "small_hashed_model"])
def test_hierarchical_round_trip(request, fixture, small_corpus):
    model = request.getfixturevalue(fixture)
    data = save_model(model)
    loaded = load_hierarchical(data)
    assert loaded.structurally_equal(model)
    assert save_model(loaded) == data
    for text in small_corpus.texts()[::50]:
        assert predict_pairs(loaded, text, 3, 2) == predict_pairs(model, text, 3, 2)


def test_serialization_is_deterministic(small_model):
    rebuilt = HierarchicalModel(
        vectorizer=small_model.vectorizer,
        tactic_model=small_model.tactic_model,
        technique_models=dict(reversed(list(small_model.technique_models.items()))),
        taxonomy=small_model.taxonomy,
        flat_technique_model=small_model.flat_technique_model,
    )
    assert save_model(rebuilt) == save_model(small_model)


def test_hashed_container_holds_no_corpus_tokens(small_corpus, small_hashed_model, small_model):
    tokens = {t for text in small_corpus.texts() for t in tokenize(text)}
    hashed = save_model(small_hashed_model)
    assert not [t for t in tokens if t.encode("utf-8") in hashed]
    vocabulary = save_model(small_model)
    assert all(t.encode("utf-8") in vocabulary for t in list(tokens)[:20])


def _section_payloads(data: bytes) -> dict:
    at = _header_end(data)
    (count,) = struct.unpack_from("<I", data, at)
    at += 4
    out = {}
    for _ in range(count):
        (length,) = struct.unpack_from("<I", data, at)
        role = data[at + 4:at + 4 + length].decode("utf-8")
        at += 4 + length
        (size,) = struct.unpack_from("<Q", data, at)
        out[role] = data[at + 8:at + 8 + size]
        at += 8 + size
    return out


def test_only_the_taxonomy_section_holds_words(taxonomy):
    # corpus words taken from the display names the taxonomy section embeds
    rows = []
    for tactic in ("TA0007", "TA0009", "TA0011"):
        for technique in sorted(taxonomy.techniques_for(tactic))[:2]:
            text = f"{taxonomy.tactic_name(tactic)} {taxonomy.techniques[technique]}"
            rows.extend(sentence(text, [tactic], [technique]) for _ in range(3))
    corpus = Corpus(tuple(rows))
    model = train_hierarchical(corpus, taxonomy, VectorizerConfig(hash_bits=10), Hyperparams(epochs=3))
    sections = _section_payloads(save_model(model))

    words = {t.encode("utf-8") for text in corpus.texts() for t in tokenize(text) if len(t) >= 5}
    assert any(w in sections["taxonomy"].lower() for w in words)
    for role, payload in sections.items():
        if role != "taxonomy":
            assert not [w for w in words if w in payload.lower()], role


def test_rejects_foreign_and_damaged_bytes():
    data = save_model(_linear())
    with pytest.raises(FormatError, match="magic"):
        load_model(b"PK\x03\x04" + data[4:])
    with pytest.raises(FormatError, match="truncated"):
        load_model(data[:-3])
    with pytest.raises(FormatError, match="trailing"):
        load_model(data + b"\0")
    with pytest.raises(FormatError, match="duplicate"):
        load_model(_with_extra_section(data, "model", b""))


def _linear_payload_start(data: bytes) -> int:
    # section_count u32, role "model", payload length u64
    return _header_end(data) + 4 + 4 + len("model") + 8


def _patched(data: bytes, offset: int, fmt: str, value) -> bytes:
    raw = bytearray(data)
    struct.pack_into(fmt, raw, offset, value)
    return bytes(raw)


def test_rejects_damaged_weight_rows():
    data = save_model(_linear())
    payload = _linear_payload_start(data)
    # class_count, dimension, two class strings, two bias values, then row 0's nnz
    first_index = payload + 4 + 4 + 2 * (4 + 6) + 2 * 8 + 4
    with pytest.raises(FormatError, match="row 0"):
        load_model(_patched(data, first_index, "<I", 999))
    with pytest.raises(FormatError, match="row 0"):
        load_model(_patched(data, first_index, "<I", 3))
    with pytest.raises(FormatError, match="non-finite"):
        load_model(_patched(data, first_index + 2 * 4, "<d", float("nan")))
    with pytest.raises(FormatError, match="non-finite bias"):
        load_model(_patched(data, first_index - 4 - 8, "<d", float("inf")))


def test_constructor_checks_surface_as_format_errors():
    data = save_model(_linear())
    second_class = _linear_payload_start(data) + 4 + 4 + (4 + 6) + 4
    assert data[second_class:second_class + 6] == b"TA0002"
    unsorted = data[:second_class] + b"TA0000" + data[second_class + 6:]
    with pytest.raises(FormatError, match="model section is invalid"):
        load_model(unsorted)


def test_rejects_out_of_range_hash_bits(small_hashed_model):
    data = save_model(small_hashed_model)
    role = struct.pack("<I", len("vectorizer")) + b"vectorizer"
    bits_at = data.index(role) + len(role) + 8 + 1
    with pytest.raises(FormatError, match="hash bits"):
        load_model(_patched(data, bits_at, "<B", 40))


def test_newer_format_version():
    data = save_model(_linear())
    newer = MAGIC + struct.pack("<I", FORMAT_VERSION + 1) + data[len(MAGIC) + 4:]
    with pytest.raises(VersionMismatch) as err:
        load_model(newer)
    assert f"version {FORMAT_VERSION + 1}" in str(err.value)
    assert f"version {FORMAT_VERSION}" in str(err.value)


def test_unknown_section_in_hierarchical_container(small_hashed_model):
    data = _with_extra_section(save_model(small_hashed_model), "calibration", b"\x00\x01")
    with pytest.raises(FormatError, match="unknown section 'calibration'"):
        load_model(data)


def test_linear_container_is_not_hierarchical(tmp_path):
    path = tmp_path / "one.atk"
    save_model_file(_linear(), path)
    with pytest.raises(FormatError, match=r"one\.atk"):
        load_model_file(path)


def test_model_file_round_trip(tmp_path, small_hashed_model):
    path = tmp_path / "model.atk"
    save_model_file(small_hashed_model, path)
    assert load_model_file(path).structurally_equal(small_hashed_model)


def test_audit_log_resume(tmp_path):
    log = AuditLog(tmp_path / "audit" / "llm.jsonl")
    log.startup()
    assert log.path.exists()

    async def write():
        await log.append({"index": 0, "text": "first", "normalized": "TA0001", "correct": True, "extra": 1})
        await log.append({"index": 1, "text": "second", "raw_response": "??", "failure_reason": "unmappable tactic"})
        await log.append({"index": 5, "text": "out of range"})

    asyncio.run(write())
    with log.path.open("a", encoding="utf-8") as f:
        f.write("{not json\n")

    records = log.read_records()
    assert len(records) == 3
    assert set(records[0]) == {"index", "text", "raw_response", "normalized", "correct", "failure_reason"}

    done = log.completed(["first", "changed", "third"])
    assert list(done) == [0]
    assert done[0]["normalized"] == "TA0001"


def test_audit_log_lines_are_json(tmp_path):
    log = AuditLog(tmp_path / "a.jsonl")
    asyncio.run(log.append({"index": 3, "text": "naïve", "correct": False}))
    line = log.path.read_text(encoding="utf-8").strip()
    assert json.loads(line)["text"] == "naïve"
