"""Parsing of agent outputs: JSON extraction, plans, hypotheses and critiques."""

from __future__ import annotations

import json
import re
from typing import Any, Dict, Iterable, List, Sequence, Tuple

from ..errors import OutputParseError
from ..logging_utils import LogComponent, get_logger
from .models import (
    CriticReview,
    Hypothesis,
    HypothesisSource,
    HypothesisVerdict,
    PlannerPlan,
    Verdict,
)
from .ordinals import word_index

logger = get_logger("parsing", LogComponent.AGENTS)

_FENCE = re.compile(r"```[A-Za-z0-9_-]*\s*\n?(.*?)```", re.DOTALL)
_TRAILING_COMMA = re.compile(r",(\s*[}\]])")
_REQUIRED_FIELDS = ("id", "statement", "key_datapoints")
_EXCERPT_CHARS = 200


def _balanced_end(text: str, start: int) -> int:
    """Index of the bracket closing the value opened at ``start``, or -1."""
    stack: List[str] = []
    in_string = False
    escaped = False
    pairs = {"{": "}", "[": "]"}
    for index in range(start, len(text)):
        char = text[index]
        if in_string:
            if escaped:
                escaped = False
            elif char == "\\":
                escaped = True
            elif char == '"':
                in_string = False
            continue
        if char == '"':
            in_string = True
        elif char in pairs:
            stack.append(pairs[char])
        elif char in "}]":
            if not stack or stack.pop() != char:
                return -1
            if not stack:
                return index
    return -1


def _remove_trailing_commas(candidate: str) -> str:
    """Drop commas directly before a closing bracket, outside strings."""
    out: List[str] = []
    in_string = False
    escaped = False
    for index, char in enumerate(candidate):
        if in_string:
            out.append(char)
            if escaped:
                escaped = False
            elif char == "\\":
                escaped = True
            elif char == '"':
                in_string = False
            continue
        if char == '"':
            in_string = True
        elif char == "," and _TRAILING_COMMA.match(candidate, index):
            continue
        out.append(char)
    return "".join(out)


def _loads(candidate: str) -> Any:
    # strict=False admits raw newlines inside strings, which models copy from the wrapped examples
    return json.loads(candidate, strict=False)


def _scan(text: str) -> str | None:
    for start, char in enumerate(text):
        if char not in "{[":
            continue
        end = _balanced_end(text, start)
        if end < 0:
            continue
        candidate = text[start:end + 1]
        for attempt in (candidate, _remove_trailing_commas(candidate)):
            try:
                _loads(attempt)
            except json.JSONDecodeError:
                continue
            return attempt
    return None


def extract_json(text: str) -> str:
    """Return the first balanced top-level JSON value in model output."""
    for block in _FENCE.findall(text):
        found = _scan(block)
        if found is not None:
            return found
    found = _scan(text)
    if found is None:
        raise OutputParseError("No balanced JSON value found in model output")
    return found


def load_json(text: str) -> Any:
    return _loads(extract_json(text))


def parse_planner_output(text: str, scientist_count: int = 3) -> PlannerPlan:
    try:
        data = load_json(text)
    except OutputParseError as exc:
        raise OutputParseError(exc.message, stage="planner") from exc
    if not isinstance(data, dict):
        raise OutputParseError("Planner output must be a JSON object", stage="planner")

    instructions: List[str] = []
    for index in range(1, scientist_count + 1):
        key = f"Agent{index}_instructions"
        if key not in data:
            raise OutputParseError(f"Planner output missing key {key}", stage="planner")
        value = data[key]
        if not isinstance(value, str) or not value.strip():
            raise OutputParseError(f"Planner output has empty {key}", stage="planner")
        instructions.append(value)

    extra = sorted(set(data) - {f"Agent{k}_instructions" for k in range(1, scientist_count + 1)})
    if extra:
        logger.warning("Planner output has unexpected keys", operation="parse_planner_output",
                       extra_fields={"keys": extra})
    return PlannerPlan(instructions=tuple(instructions))


def _hypothesis_items(data: Any) -> List[Any]:
    if isinstance(data, list):
        return data
    if isinstance(data, dict):
        for key in ("hypothesis", "hypotheses"):
            if isinstance(data.get(key), list):
                return data[key]
    raise OutputParseError("Expected a JSON array of hypotheses or an object with a 'hypothesis' array")


def _field_text(value: Any) -> Any:
    if isinstance(value, list) and all(isinstance(item, str) for item in value):
        return "; ".join(value)
    return value


def parse_hypotheses(text: str, source: HypothesisSource, iteration: int) -> List[Hypothesis]:
    """Accepts a bare array or {"hypothesis": [...]}."""
    items = _hypothesis_items(load_json(text))
    hypotheses: List[Hypothesis] = []
    for position, item in enumerate(items):
        if not isinstance(item, dict):
            raise OutputParseError(f"element {position} is not an object")
        values: Dict[str, Any] = {}
        for field_name in _REQUIRED_FIELDS:
            if field_name not in item:
                raise OutputParseError(f"element {position} missing {field_name}")
            value = _field_text(item[field_name])
            if not isinstance(value, str) or not value.strip():
                raise OutputParseError(f"element {position} has empty or non-text {field_name}")
            values[field_name] = value
        word_index(values["id"])
        hypotheses.append(Hypothesis(source=source, iteration=iteration, **values))
    return hypotheses


def serialize_hypotheses(hypotheses: Iterable[Hypothesis], wrapped: bool = True) -> str:
    """Agent wire format; the wrapped shape is the one agents are asked to emit."""
    items = [h.wire() for h in hypotheses]
    payload: Any = {"hypothesis": items} if wrapped else items
    return json.dumps(payload, ensure_ascii=False, indent=4)


def _id_pattern(hypothesis_id: str) -> re.Pattern[str]:
    # critiques written in LaTeX escape underscores (H\_final\_one)
    body = r"\\?_".join(re.escape(part) for part in hypothesis_id.split("_"))
    return re.compile(r"(?<![A-Za-z0-9_\\])" + body + r"(?![A-Za-z0-9_\\])")


_HEADING_PREFIX = re.compile(r"^[\s>#*\-\d.):]*(?:\\textbf\{)?[\s*]*(?:hypothesis\s*)?$", re.IGNORECASE)


def _mentions(text: str, hypothesis_ids: Sequence[str]) -> List[Tuple[int, str, bool]]:
    found: List[Tuple[int, str, bool]] = []
    for hypothesis_id in hypothesis_ids:
        for match in _id_pattern(hypothesis_id).finditer(text):
            line_start = text.rfind("\n", 0, match.start()) + 1
            heading = bool(_HEADING_PREFIX.match(text[line_start:match.start()]))
            found.append((match.start(), hypothesis_id, heading))
    return sorted(found)


def _verdict(section: str) -> Verdict:
    lowered = section.lower()
    if "reject" in lowered:
        return Verdict.REJECT
    if "weakness" in lowered or "flaw" in lowered:
        return Verdict.REVISE
    return Verdict.KEEP


def parse_critic(text: str, hypothesis_ids: Sequence[str]) -> CriticReview:
    """Keyword verdicts per hypothesis section.

    Sections start at heading-like mentions of an id when there are any, otherwise at
    every mention. Ids the critique never mentions are kept.
    """
    mentions = _mentions(text, hypothesis_ids)
    if any(heading for _, _, heading in mentions):
        mentions = [m for m in mentions if m[2]]

    sections: Dict[str, List[str]] = {hid: [] for hid in hypothesis_ids}
    for position, (start, hypothesis_id, _) in enumerate(mentions):
        end = mentions[position + 1][0] if position + 1 < len(mentions) else len(text)
        sections[hypothesis_id].append(text[start:end])

    per_hypothesis: Dict[str, HypothesisVerdict] = {}
    for hypothesis_id in hypothesis_ids:
        section = "\n".join(sections[hypothesis_id])
        excerpt = " ".join(section.split())[:_EXCERPT_CHARS]
        per_hypothesis[hypothesis_id] = HypothesisVerdict(verdict=_verdict(section), excerpt=excerpt)
    return CriticReview(text=text, per_hypothesis=per_hypothesis)
