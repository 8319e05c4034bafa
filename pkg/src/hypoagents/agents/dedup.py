"""Near-duplicate filtering and final renumbering of hypotheses."""

from __future__ import annotations

import re
from typing import Dict, Iterable, List, Sequence, Set, Tuple

from ..logging_utils import LogComponent, get_logger
from .models import Hypothesis, HypothesisSource
from .ordinals import final_id

logger = get_logger("dedup", LogComponent.AGENTS)

DEFAULT_THRESHOLD = 0.9

_PUNCTUATION = re.compile(r"[^\w\s]")


def normalize_statement(text: str) -> str:
    """Lowercase, drop punctuation, collapse whitespace."""
    return " ".join(_PUNCTUATION.sub(" ", text.lower()).split())


def _tokens(text: str) -> Set[str]:
    return set(normalize_statement(text).split())


def jaccard(a: str, b: str) -> float:
    left, right = _tokens(a), _tokens(b)
    if not left and not right:
        return 1.0
    return len(left & right) / len(left | right)


def prefilter_duplicates(
    hypotheses: Sequence[Hypothesis],
    threshold: float = DEFAULT_THRESHOLD,
) -> Tuple[List[Hypothesis], List[Hypothesis]]:
    """Drop later hypotheses whose statement overlaps an already-kept one at or above threshold."""
    kept: List[Hypothesis] = []
    dropped: List[Hypothesis] = []
    for candidate in hypotheses:
        duplicate_of = next(
            (prior for prior in kept if jaccard(prior.statement, candidate.statement) >= threshold),
            None,
        )
        if duplicate_of is None:
            kept.append(candidate)
            continue
        dropped.append(candidate)
        logger.info(
            "Dropped near-duplicate hypothesis",
            operation="prefilter_duplicates",
            extra_fields={
                "dropped": candidate.id,
                "dropped_source": candidate.source.label(),
                "kept": duplicate_of.id,
                "kept_source": duplicate_of.source.label(),
            },
        )
    return kept, dropped


def renumber_final(hypotheses: Sequence[Hypothesis]) -> List[Hypothesis]:
    """Ids become H_final_one..H_final_<n> in list order; statements are untouched."""
    return [h.model_copy(update={"id": final_id(n)}) for n, h in enumerate(hypotheses, start=1)]


def non_verbatim_statements(
    accumulated: Iterable[Hypothesis],
    candidates: Iterable[Hypothesis],
) -> List[str]:
    """Ids of accumulated hypotheses whose statement matches no candidate exactly."""
    known = {h.statement for h in candidates}
    return [h.id for h in accumulated if h.statement not in known]


def attach_origin(accumulated: Sequence[Hypothesis], candidates: Sequence[Hypothesis]) -> List[Hypothesis]:
    """Record the scientist each verbatim-copied statement came from."""
    origins: Dict[str, HypothesisSource] = {}
    for candidate in candidates:
        origins.setdefault(candidate.statement, candidate.source)
    return [
        h.model_copy(update={"origin": origins[h.statement]}) if h.statement in origins else h
        for h in accumulated
    ]
