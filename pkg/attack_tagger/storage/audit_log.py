from __future__ import annotations

import json
import logging
from pathlib import Path
from typing import Any, Dict, List, Sequence, Union

logger = logging.getLogger("attack_tagger.storage")

AUDIT_FIELDS = ("index", "text", "raw_response", "normalized", "correct", "failure_reason")


class AuditLog:
    """
    Append-only JSONL record of per-sentence LLM results.
    A record is reused on a later run only when its index and text both match.
    """

    def __init__(self, path: Union[str, Path]):
        self._path = Path(path)

    @property
    def path(self) -> Path:
        return self._path

    def startup(self) -> None:
        self._path.parent.mkdir(parents=True, exist_ok=True)
        if not self._path.exists():
            self._path.write_text("", encoding="utf-8")

    def read_records(self) -> List[Dict[str, Any]]:
        if not self._path.exists():
            return []
        out: List[Dict[str, Any]] = []
        for lineno, raw in enumerate(self._path.read_text(encoding="utf-8").splitlines(), start=1):
            raw = raw.strip()
            if not raw:
                continue
            try:
                rec = json.loads(raw)
            except json.JSONDecodeError:
                logger.warning("%s line %s: unreadable audit record skipped", self._path, lineno)
                continue
            if isinstance(rec, dict) and isinstance(rec.get("index"), int):
                out.append(rec)
        return out

    def completed(self, texts: Sequence[str]) -> Dict[int, Dict[str, Any]]:
        done: Dict[int, Dict[str, Any]] = {}
        for rec in self.read_records():
            i = rec["index"]
            if 0 <= i < len(texts) and rec.get("text") == texts[i]:
                done[i] = rec
        return done

    async def append(self, record: Dict[str, Any]) -> None:
        line = json.dumps({k: record.get(k) for k in AUDIT_FIELDS}, ensure_ascii=False)
        with self._path.open("a", encoding="utf-8") as f:
            f.write(line + "\n")
