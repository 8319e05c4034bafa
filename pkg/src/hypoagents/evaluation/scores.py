"""Expert score cards: CSV ingest, validation and novelty/plausibility classification."""

from __future__ import annotations

import csv
import io
import re
from pathlib import Path
from typing import Annotated, Dict, Iterable, List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field

from ..agents.models import Hypothesis
from ..errors import ScoreFormatError, UnknownHypothesisError

CRITERIA: Tuple[str, ...] = ("novelty", "consistency", "clarity", "empirical", "scope", "predictive")
HEADER: Tuple[str, ...] = ("hypothesis_id", *CRITERIA)

NOVELTY_THRESHOLD = 5
PLAUSIBILITY_THRESHOLD = 8

Score = Annotated[int, Field(ge=0, le=10, strict=True)]

_INTEGER = re.compile(r"^[+-]?\d+$")


class ScoreCard(BaseModel):
    model_config = ConfigDict(frozen=True)

    hypothesis_id: str
    novelty: Score
    consistency: Score
    clarity: Score
    empirical: Score
    scope: Score
    predictive: Score

    def scores(self) -> Tuple[int, ...]:
        return tuple(getattr(self, name) for name in CRITERIA)

    def other_scores(self) -> Tuple[int, ...]:
        return self.scores()[1:]


class Classification(BaseModel):
    model_config = ConfigDict(frozen=True)

    novel: bool
    plausible: bool
    other_mean: float

    def label(self) -> str:
        return f"{'novel' if self.novel else 'not novel'}, {'plausible' if self.plausible else 'not plausible'}"


def classify(card: ScoreCard) -> Classification:
    """Novel iff novelty >= 5; plausible iff the mean of the other five criteria >= 8."""
    others = card.other_scores()
    return Classification(
        novel=card.novelty >= NOVELTY_THRESHOLD,
        # integer comparison keeps the 8.0 boundary exact
        plausible=sum(others) >= PLAUSIBILITY_THRESHOLD * len(others),
        other_mean=sum(others) / len(others),
    )


def _score_cell(value: str, criterion: str, row: int) -> int:
    text = value.strip()
    if not _INTEGER.match(text):
        raise ScoreFormatError(f"{criterion} value '{value}' is not an integer", row=row)
    number = int(text)
    if not 0 <= number <= 10:
        raise ScoreFormatError(f"{criterion} value {number} is outside 0..10", row=row)
    return number


def parse_scores(text: str) -> List[ScoreCard]:
    reader = csv.reader(io.StringIO(text))
    rows = [(number, row) for number, row in enumerate(reader, start=1) if any(cell.strip() for cell in row)]
    if not rows:
        raise ScoreFormatError("Score file is empty; expected header " + ",".join(HEADER))
    header_row, header = rows[0]
    if tuple(cell.strip().lower() for cell in header) != HEADER:
        raise ScoreFormatError(f"Expected header {','.join(HEADER)}", row=header_row)

    cards: List[ScoreCard] = []
    seen: Dict[str, int] = {}
    for number, row in rows[1:]:
        if len(row) != len(HEADER):
            raise ScoreFormatError(f"Expected {len(HEADER)} columns, found {len(row)}", row=number)
        hypothesis_id = row[0].strip()
        if not hypothesis_id:
            raise ScoreFormatError("Empty hypothesis_id", row=number)
        if hypothesis_id in seen:
            raise ScoreFormatError(f"Duplicate hypothesis_id {hypothesis_id} (first on row {seen[hypothesis_id]})",
                                   row=number)
        seen[hypothesis_id] = number
        values = {name: _score_cell(cell, name, number) for name, cell in zip(CRITERIA, row[1:])}
        cards.append(ScoreCard(hypothesis_id=hypothesis_id, **values))
    return cards


def ingest_scores(path: Path | str) -> List[ScoreCard]:
    csv_path = Path(path)
    try:
        text = csv_path.read_text(encoding="utf-8-sig")
    except (OSError, UnicodeDecodeError) as exc:
        raise ScoreFormatError(f"Score file unreadable: {csv_path} ({exc})") from exc
    return parse_scores(text)


def resolve_cards(cards: Iterable[ScoreCard], hypotheses: Iterable[Hypothesis]) -> Dict[str, ScoreCard]:
    """Map cards to run-wide hypothesis keys.

    A card may name the key ("3:H_final_two") or a bare id that occurs once in the run.
    """
    by_key = {h.key: h for h in hypotheses}
    by_id: Dict[str, List[str]] = {}
    for key, hypothesis in by_key.items():
        by_id.setdefault(hypothesis.id, []).append(key)

    resolved: Dict[str, ScoreCard] = {}
    for card in cards:
        key: Optional[str] = card.hypothesis_id if card.hypothesis_id in by_key else None
        if key is None:
            candidates = by_id.get(card.hypothesis_id, [])
            if len(candidates) > 1:
                raise ScoreFormatError(
                    f"Hypothesis id {card.hypothesis_id} is ambiguous across iterations; "
                    f"use one of {', '.join(candidates)}"
                )
            if not candidates:
                raise UnknownHypothesisError(card.hypothesis_id)
            key = candidates[0]
        if key in resolved:
            raise ScoreFormatError(f"Hypothesis {key} scored twice")
        resolved[key] = card
    return resolved
