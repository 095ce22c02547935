from __future__ import annotations

import asyncio
import logging
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

from attack_tagger import config
from attack_tagger.corpus import Corpus, LabeledSentence
from attack_tagger.errors import EmptyTestSet, TransportError, ValidationError
from attack_tagger.llm.normalize import LlmVerdict, normalize_response
from attack_tagger.llm.prompt import PromptRequest, build_prompt
from attack_tagger.llm.provider import ChatClient
from attack_tagger.metrics import EvalReport, macro_f1, weighted_f1
from attack_tagger.storage import AuditLog
from attack_tagger.taxonomy import AttackTaxonomy

logger = logging.getLogger("attack_tagger.llm")

TRANSPORT_FAILURE = "transport failure"


@dataclass(frozen=True)
class RetryPolicy:
    """
    Attempt k (1-based) that fails waits backoff_s * 2^(k-1) before the next one.
    """

    max_attempts: int = 3
    backoff_s: float = 1.0

    @classmethod
    def from_config(cls) -> "RetryPolicy":
        return cls(max_attempts=config.llm_max_attempts(), backoff_s=config.llm_backoff_s())


@dataclass(frozen=True)
class LlmOutcome:
    index: int
    sentence: LabeledSentence
    verdict: LlmVerdict

    @property
    def correct(self) -> bool:
        return self.verdict.normalized is not None and self.verdict.normalized in self.sentence.tactic_labels


async def query_with_retry(
    client: ChatClient,
    request: PromptRequest,
    policy: RetryPolicy,
) -> Tuple[Optional[str], Optional[str]]:
    """
    (reply, None) on success, (None, reason) once every attempt failed.
    """
    last = ""
    for attempt in range(1, int(policy.max_attempts) + 1):
        try:
            return await client.complete(request), None
        except TransportError as e:
            last = str(e)
            logger.warning("llm request attempt %s/%s failed: %s", attempt, policy.max_attempts, last)
            if attempt < int(policy.max_attempts) and policy.backoff_s > 0:
                await asyncio.sleep(float(policy.backoff_s) * (2 ** (attempt - 1)))
    return None, f"{TRANSPORT_FAILURE} after {policy.max_attempts} attempts: {last}"


def _resumed(rec: Dict) -> Optional[LlmVerdict]:
    # Transport failures are sent again.
    if str(rec.get("failure_reason") or "").startswith(TRANSPORT_FAILURE):
        return None
    try:
        return LlmVerdict(
            raw_response=str(rec.get("raw_response") or ""),
            normalized=rec.get("normalized"),
            failure_reason=rec.get("failure_reason"),
        )
    except ValidationError:
        return None


async def evaluate_llm(
    test: Corpus,
    client: ChatClient,
    taxonomy: AttackTaxonomy,
    *,
    audit: Optional[AuditLog] = None,
    concurrency: Optional[int] = None,
    policy: Optional[RetryPolicy] = None,
    model_name: Optional[str] = None,
    temperature: Optional[float] = None,
) -> EvalReport:
    """
    One chat request per tactic-labeled sentence; a reply is correct when it normalizes to one
    of the sentence's tactics. Unmappable replies and exhausted retries count as incorrect.

    With `audit`, each result is appended as soon as it arrives and sentences already recorded
    (same index, same text) are not sent again, except those that failed in transport.
    """
    policy = policy or RetryPolicy.from_config()
    limit = max(1, int(concurrency if concurrency is not None else config.llm_concurrency()))
    texts = test.texts()
    done: Dict[int, Dict] = {}
    if audit is not None:
        audit.startup()
        done = audit.completed(texts)
        if done:
            logger.info("resuming: %s sentences already in %s", len(done), audit.path)

    semaphore = asyncio.Semaphore(limit)

    async def one(index: int, sentence: LabeledSentence) -> LlmOutcome:
        if index in done:
            verdict = _resumed(done[index])
            if verdict is not None:
                return LlmOutcome(index, sentence, verdict)
        async with semaphore:
            request = build_prompt(sentence.text, model_name=model_name, temperature=temperature)
            raw, failure = await query_with_retry(client, request, policy)
        if raw is None:
            verdict = LlmVerdict(raw_response="", failure_reason=failure)
        else:
            verdict = normalize_response(raw, taxonomy)
        outcome = LlmOutcome(index, sentence, verdict)
        if audit is not None:
            await audit.append(
                {
                    "index": index,
                    "text": sentence.text,
                    "raw_response": verdict.raw_response,
                    "normalized": verdict.normalized,
                    "correct": outcome.correct,
                    "failure_reason": verdict.failure_reason,
                }
            )
        return outcome

    jobs = [one(i, s) for i, s in enumerate(test.sentences) if not s.is_unlabeled]
    skipped = len(test) - len(jobs)
    if not jobs:
        raise EmptyTestSet("No tactic-labeled sentence to send")
    outcomes: List[LlmOutcome] = sorted(await asyncio.gather(*jobs), key=lambda o: o.index)

    report = EvalReport(metric_name="accuracy", mode="llm tactic", skipped=skipped, failures=0)
    gt: List[str] = []
    pred: List[str] = []
    for o in outcomes:
        report.total_predictions += 1
        report.sentences += 1
        report.correct += int(o.correct)
        report.credit(sorted(o.sentence.tactic_labels), o.correct)
        if o.verdict.failure_reason is not None:
            report.failures += 1
            logger.warning("sentence %s: %s", o.index, o.verdict.failure_reason)
        gt.append(o.verdict.normalized if o.correct else min(o.sentence.tactic_labels))
        pred.append(o.verdict.normalized or "")
    report.f1_macro = macro_f1(gt, pred)
    report.f1_weighted = weighted_f1(gt, pred)
    logger.info("llm baseline: %s/%s correct, %s failures", report.correct, report.total_predictions, report.failures)
    return report
