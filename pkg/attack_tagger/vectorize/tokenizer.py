from __future__ import annotations

import re
from typing import List

# Runs of alphanumeric codepoints: word characters minus the underscore.
_TOKEN_RE = re.compile(r"[^\W_]+")

MIN_TOKEN_LENGTH = 2


def tokenize(text: str) -> List[str]:
    """
    Lower-case, split on every non-alphanumeric codepoint, drop tokens shorter than 2.
    No stemming, no stop words.
    """
    return [t for t in _TOKEN_RE.findall(str(text or "").lower()) if len(t) >= MIN_TOKEN_LENGTH]
