"""Search-query construction from hypothesis statements."""

from __future__ import annotations

import re
from typing import Union

from ..agents.models import Hypothesis

MAX_QUERY_CHARS = 300

_ID_PARENTHETICAL = re.compile(r"\s*\(\s*IDs?\b[^)]*\)")
_BARE_IDS = re.compile(r"\bIDs?\s+\d+(?:\s*(?:,|and|&)\s*\d+)*")
_SPACE_BEFORE_PUNCT = re.compile(r"\s+([,.;:])")


def build_query(hypothesis: Union[Hypothesis, str]) -> str:
    """Statement without compound-id tokens, at most 300 characters, cut at a word boundary."""
    statement = hypothesis.statement if isinstance(hypothesis, Hypothesis) else hypothesis
    text = _ID_PARENTHETICAL.sub("", statement)
    text = _BARE_IDS.sub("", text)
    text = " ".join(text.split())
    text = _SPACE_BEFORE_PUNCT.sub(r"\1", text)
    if len(text) <= MAX_QUERY_CHARS:
        return text
    cut = text.rfind(" ", 0, MAX_QUERY_CHARS + 1)
    return text[:cut].rstrip() if cut > 0 else text[:MAX_QUERY_CHARS]
