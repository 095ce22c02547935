from __future__ import annotations

import hashlib
import json
import logging
from pathlib import Path
from typing import Dict, List, Union

from pydantic import BaseModel, ConfigDict
from pydantic import ValidationError as SchemaError

from attack_tagger.corpus.model import Corpus, DistributionSpec, LabeledSentence
from attack_tagger.errors import EmptyCorpus, ParseError, ValidationError
from attack_tagger.taxonomy import (
    AttackTaxonomy,
    TacticId,
    parse_tactic_id,
    parse_technique_id,
)

logger = logging.getLogger("attack_tagger.corpus")

ORPHAN_POLICIES = ("drop", "infer")


class _CorpusLine(BaseModel):
    model_config = ConfigDict(extra="ignore", strict=True)

    text: str
    tactics: List[str]
    techniques: List[str] = []
    source: str = "unknown"


class _DistributionFile(BaseModel):
    model_config = ConfigDict(extra="forbid", strict=True)

    counts: Dict[str, int]
    overlap: Union[float, int]
    seed: int
    tokens_per_sentence: int = 12


def ingest(data: Union[bytes, str], *, taxonomy_version: str = "") -> Corpus:
    """
    Parse corpus JSONL: {"text": str, "tactics": [str], "techniques": [str], "source": str}.
    Order is preserved. Unlabeled sentences are kept (see Corpus.labeled()).
    """
    raw = data.encode("utf-8") if isinstance(data, str) else bytes(data)
    try:
        text = raw.decode("utf-8")
    except UnicodeDecodeError as e:
        raise ParseError(f"Corpus is not valid UTF-8: {e}") from e

    sentences: List[LabeledSentence] = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            doc = json.loads(line)
        except json.JSONDecodeError as e:
            raise ParseError(f"invalid JSON: {e.msg}", line=lineno) from e
        try:
            parsed = _CorpusLine.model_validate(doc)
        except SchemaError as e:
            raise ParseError(f"does not match the corpus line format: {e.errors()[0].get('msg')}", line=lineno) from e
        if not parsed.text.strip():
            raise ParseError("text is empty", line=lineno)
        try:
            tactics = [parse_tactic_id(t) for t in parsed.tactics]
            techniques = [parse_technique_id(t) for t in parsed.techniques]
        except ValidationError as e:
            raise ParseError(str(e), line=lineno) from e

        if len(set(tactics)) != len(tactics) or len(set(techniques)) != len(techniques):
            logger.warning("line %s: duplicate labels collapsed", lineno)
        sentence = LabeledSentence(
            text=parsed.text,
            tactic_labels=frozenset(tactics),
            technique_labels=frozenset(techniques),
            source=parsed.source,
        )
        if sentence.has_orphan_techniques:
            logger.warning("line %s: technique labels without a tactic label", lineno)
        sentences.append(sentence)

    if not sentences:
        raise EmptyCorpus("Corpus contains no sentences")
    corpus = Corpus(tuple(sentences), taxonomy_version)
    unlabeled = corpus.unlabeled_count()
    if unlabeled:
        logger.info("ingested %s sentences (%s without tactic labels)", len(corpus), unlabeled)
    return corpus


def load_corpus_file(path: Union[str, Path], *, taxonomy_version: str = "") -> Corpus:
    return ingest(Path(path).read_bytes(), taxonomy_version=taxonomy_version)


def dump_corpus(corpus: Corpus) -> bytes:
    lines: List[str] = []
    for s in corpus.sentences:
        lines.append(
            json.dumps(
                {
                    "text": s.text,
                    "tactics": sorted(s.tactic_labels),
                    "techniques": sorted(s.technique_labels),
                    "source": s.source,
                },
                ensure_ascii=False,
            )
        )
    return ("\n".join(lines) + "\n").encode("utf-8") if lines else b""


def write_corpus_file(corpus: Corpus, path: Union[str, Path]) -> None:
    Path(path).write_bytes(dump_corpus(corpus))


def corpus_fingerprint(corpus: Corpus) -> str:
    return hashlib.sha256(dump_corpus(corpus)).hexdigest()


def resolve_orphans(corpus: Corpus, taxonomy: AttackTaxonomy, policy: str = "drop") -> Corpus:
    """
    Sentences carrying technique labels but no tactic label.
    drop: left untouched (they stay unlabeled and are filtered with the rest).
    infer: tactic labels become the union of the techniques' taxonomy parents.
    """
    if policy not in ORPHAN_POLICIES:
        raise ValidationError(f"Unknown orphan policy: {policy}")
    if policy == "drop":
        return corpus
    out: List[LabeledSentence] = []
    inferred = 0
    for s in corpus.sentences:
        if s.has_orphan_techniques:
            parents: set = set()
            for t in s.technique_labels:
                parents |= set(taxonomy.parents.get(t, frozenset()))
            if parents:
                s = LabeledSentence(s.text, frozenset(parents), s.technique_labels, s.source)
                inferred += 1
        out.append(s)
    if inferred:
        logger.info("inferred tactic labels for %s sentences", inferred)
    return Corpus(tuple(out), corpus.taxonomy_version)


def label_problems(corpus: Corpus, taxonomy: AttackTaxonomy) -> List[str]:
    problems: List[str] = []
    for i, s in enumerate(corpus.sentences, start=1):
        for t in sorted(s.tactic_labels):
            if t not in taxonomy.tactics:
                problems.append(f"sentence {i}: unknown tactic {t}")
        for t in sorted(s.technique_labels):
            if t not in taxonomy.techniques:
                problems.append(f"sentence {i}: unknown technique {t}")
            elif s.tactic_labels and not any(taxonomy.validate_pair(ta, t) for ta in s.tactic_labels):
                problems.append(f"sentence {i}: technique {t} is not a child of any labeled tactic")
    return problems


def load_distribution_spec(data: Union[bytes, str]) -> DistributionSpec:
    """
    DistributionSpec file: {"counts": {tacticId: int}, "overlap": number, "seed": int}.
    """
    raw = data.encode("utf-8") if isinstance(data, str) else bytes(data)
    try:
        doc = json.loads(raw.decode("utf-8"))
        parsed = _DistributionFile.model_validate(doc)
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise ParseError(f"Distribution spec is not valid JSON: {e}") from e
    except SchemaError as e:
        raise ParseError(f"Distribution spec does not match the file format: {e}") from e
    counts: Dict[TacticId, int] = {}
    for k, v in parsed.counts.items():
        counts[parse_tactic_id(k)] = int(v)
    return DistributionSpec(
        counts=counts,
        overlap=float(parsed.overlap),
        seed=int(parsed.seed),
        tokens_per_sentence=int(parsed.tokens_per_sentence),
    )


def load_distribution_file(path: Union[str, Path]) -> DistributionSpec:
    return load_distribution_spec(Path(path).read_bytes())
