"""Background-context assembly from user-selected Markdown documents."""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, List, Sequence, Tuple

from .errors import ContextBudgetError, DocumentError
from .logging_utils import LogComponent, get_logger

logger = get_logger("context", LogComponent.CONTEXT)

_HEADING = re.compile(r"^\s{0,3}#{1,6}\s+(.+?)\s*#*\s*$", re.MULTILINE)
DOCUMENT_SEPARATOR = "\n\n"


def estimate_tokens(text: str) -> int:
    """Provider-independent estimate: one token per four characters, rounded up."""
    return math.ceil(len(text) / 4)


@dataclass(frozen=True)
class ContextDocument:
    path: str
    title: str
    body: str
    approx_tokens: int

    @classmethod
    def from_text(cls, path: str, body: str) -> "ContextDocument":
        if not body.strip():
            raise DocumentError("Context document is empty", path)
        match = _HEADING.search(body)
        title = match.group(1).strip() if match else Path(path).stem
        return cls(path=path, title=title, body=body, approx_tokens=estimate_tokens(body))


@dataclass(frozen=True)
class ContextBundle:
    documents: Tuple[ContextDocument, ...]
    total_tokens: int
    budget: int
    underspecified: bool = False

    def render(self) -> str:
        """Text bound to the SELECTED_PAPERS slot."""
        return DOCUMENT_SEPARATOR.join(doc.body for doc in self.documents)

    @property
    def titles(self) -> List[str]:
        return [doc.title for doc in self.documents]


def load_documents(paths: Iterable[Path | str]) -> List[ContextDocument]:
    """Read Markdown files in the given order."""
    documents: List[ContextDocument] = []
    for raw_path in paths:
        path = Path(raw_path)
        if not path.is_file():
            raise DocumentError("Context document not found", str(path))
        try:
            body = path.read_text(encoding="utf-8")
        except (OSError, UnicodeDecodeError) as exc:
            raise DocumentError(f"Context document unreadable ({exc})", str(path)) from exc
        documents.append(ContextDocument.from_text(str(path), body))
    return documents


def assemble_context(docs: Sequence[ContextDocument], budget: int) -> ContextBundle:
    """Bundle every document or fail; never truncates and never reorders."""
    if budget <= 0:
        raise ValueError("budget must be positive")

    total = sum(doc.approx_tokens for doc in docs)
    if not docs:
        logger.warning(
            "No context documents selected; hypotheses risk being overly general",
            operation="assemble_context",
        )
        return ContextBundle(documents=(), total_tokens=0, budget=budget, underspecified=True)

    if total <= budget:
        logger.info(
            "Context assembled",
            operation="assemble_context",
            extra_fields={"documents": len(docs), "total_tokens": total, "budget": budget},
        )
        return ContextBundle(documents=tuple(docs), total_tokens=total, budget=budget)

    # smallest suffix whose removal brings the total within budget
    remaining = total
    cut = len(docs)
    while cut > 0 and remaining > budget:
        cut -= 1
        remaining -= docs[cut].approx_tokens
    offending = [f"{doc.title} ({doc.path}, {doc.approx_tokens} tokens)" for doc in docs[cut:]]
    raise ContextBudgetError(offending, overage=total - budget, budget=budget)
