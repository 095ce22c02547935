from __future__ import annotations

import json
import sys
from dataclasses import dataclass
from typing import Any, Dict, Optional, TextIO


@dataclass
class Printer:
    """
    Terminal output for the CLI. Results go to `out`; `err` gets human notices.
    """

    out: Optional[TextIO] = None
    err: Optional[TextIO] = None

    def __post_init__(self):
        if self.out is None:
            self.out = sys.stdout
        if self.err is None:
            self.err = sys.stderr

    def jsonl(self, doc: Dict[str, Any]) -> None:
        print(json.dumps(doc, sort_keys=True, ensure_ascii=False), file=self.out, flush=True)

    def text(self, s: str) -> None:
        print(s, end="" if s.endswith("\n") else "\n", file=self.out, flush=True)

    def error(self, message: str) -> None:
        print(f"ERROR: {message}", file=self.err, flush=True)
