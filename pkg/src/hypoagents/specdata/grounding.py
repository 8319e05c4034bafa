"""Claim extraction from ``key_datapoints`` text and grounding verification.

The grammar is deliberately conservative. Text is split into clauses on ``;`` and
newlines, and a clause is split again where a compound mention follows the sample list
of an earlier one ("ID 12 in ALH 83100, LEW 85311, ID 13 in Orgueil"). Each segment
contributes Present assertions for the samples it names before a negation phrase and Absent
assertions for the samples named after it. ``only``/``exclusively`` in the positive part
adds Absent assertions for the remaining samples, restricted to the other sample class
when the clause names a class ("found only in meteorite samples ..."). Hedged class
phrases ("most soil samples") produce nothing. Anything the vocabulary does not know
is kept as a reference so verification reports it as unresolved instead of guessing.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Set, Tuple

from ..logging_utils import LogComponent, get_logger
from .models import (
    Assertion,
    ClaimRefs,
    CompoundRef,
    GroundingReport,
    Polarity,
    PresenceMatrix,
    SampleClass,
)

logger = get_logger("grounding", LogComponent.SPECDATA)

_ID_SEPARATOR = r"\s*(?:,\s*(?:and\s+)?|and\s+|&\s*)\s*"
_ID_LIST = re.compile(r"\bIDs?\s*#?\s*(\d+(?:" + _ID_SEPARATOR + r"\d+)*)")
_NUMBER = re.compile(r"\d+")
_PARENTHETICAL = re.compile(r"\(([^()]*)\)")
_NEGATION = re.compile(
    r"\b(?:but\s+)?(?:notably\s+|completely\s+|entirely\s+)?"
    r"(?:absent|not\s+found|not\s+detected|not\s+present|missing|lacking)\s+(?:in|from)\b"
    r"|\bbut\s+not\s+(?:in|from)\b|\bnot\s+in\b",
    re.IGNORECASE,
)
_EXCLUSIVE = re.compile(r"\b(?:only|exclusively|solely)\b", re.IGNORECASE)
_CLASS_WORDS = {
    SampleClass.METEORITE: re.compile(r"\bmeteorit(?:e|es|ic)\b", re.IGNORECASE),
    SampleClass.SOIL: re.compile(r"\bsoils?\b", re.IGNORECASE),
}
_HEDGES = re.compile(r"\b(?:most|some|many|several|few|certain|other|majority)\b", re.IGNORECASE)
_SOIL_LIKE = re.compile(r"\b((?:[A-Z][\w-]*\s+)+[Ss]oils?)\b")
_NON_NAME_WORDS = {"all", "the", "both", "only", "in", "and", "terrestrial", "these", "those", "other",
                   "most", "some", "absent", "found", "but", "not", "from", "id", "ids"}

Span = Tuple[int, int]


@dataclass
class _Vocabulary:
    samples: List[Tuple[str, re.Pattern[str]]]
    compounds: List[Tuple[int, str, re.Pattern[str]]]

    @classmethod
    def from_matrix(cls, matrix: PresenceMatrix) -> "_Vocabulary":
        samples = sorted(((s.name, _phrase_pattern(s.name)) for s in matrix.samples),
                         key=lambda item: len(item[0]), reverse=True)
        compounds = sorted(
            ((c.id, name, _phrase_pattern(name)) for c in matrix.compounds for name in c.all_names),
            key=lambda item: len(item[1]),
            reverse=True,
        )
        return cls(samples=samples, compounds=compounds)


def _phrase_pattern(phrase: str) -> re.Pattern[str]:
    words = [re.escape(part) for part in phrase.split()]
    return re.compile(r"(?<![\w-])" + r"\s+".join(words) + r"(?![\w-])", re.IGNORECASE)


def _overlaps(span: Span, taken: Sequence[Span]) -> bool:
    return any(span[0] < end and start < span[1] for start, end in taken)


def _sample_matches(text: str, vocab: _Vocabulary) -> List[Tuple[int, int, str]]:
    taken: List[Tuple[int, int, str]] = []
    for name, pattern in vocab.samples:
        for match in pattern.finditer(text):
            span = match.span()
            if not _overlaps(span, [(s, e) for s, e, _ in taken]):
                taken.append((span[0], span[1], name))
    return sorted(taken)


def _find_samples(text: str, vocab: _Vocabulary) -> Tuple[List[str], str]:
    """Return vocabulary sample names in text order and the text with those spans blanked."""
    taken = _sample_matches(text, vocab)
    masked = list(text)
    for start, end, _ in taken:
        masked[start:end] = " " * (end - start)
    return [name for _, _, name in taken], "".join(masked)


def _compound_matches(text: str, vocab: _Vocabulary) -> List[Tuple[int, int, int, str]]:
    taken: List[Tuple[int, int, int, str]] = []
    for compound_id, name, pattern in vocab.compounds:
        for match in pattern.finditer(text):
            span = match.span()
            if not _overlaps(span, [(s, e) for s, e, _, _ in taken]):
                taken.append((span[0], span[1], compound_id, name))
    return sorted(taken)


def _find_compounds(text: str, vocab: _Vocabulary) -> List[Tuple[int, str]]:
    return [(compound_id, name) for _, _, compound_id, name in _compound_matches(text, vocab)]


def _segments(clause: str, vocab: _Vocabulary) -> List[str]:
    """Cut a clause before each compound mention that follows a sample or class mention.

    Mentions inside parentheses never start a segment, so "ID 14 (dibenzothiophene)" stays
    one reference.
    """
    enclosed = [match.span() for match in _PARENTHETICAL.finditer(clause)]
    samples = _sample_matches(clause, vocab)
    masked = list(clause)
    for start, end, _ in samples:
        masked[start:end] = " " * (end - start)
    masked_text = "".join(masked)

    markers = [start for start, _, _ in samples]
    markers.extend(m.start() for pattern in _CLASS_WORDS.values() for m in pattern.finditer(masked_text))
    mentions = [m.start() for m in _ID_LIST.finditer(masked_text)]
    mentions.extend(start for start, _, _, _ in _compound_matches(masked_text, vocab))
    starts = sorted({p for p in mentions if not any(a <= p < b for a, b in enclosed)})

    cuts: List[int] = []
    first: Optional[int] = None
    for position in starts:
        if first is not None and any(first < marker < position for marker in markers):
            cuts.append(position)
            first = position
        elif first is None:
            first = position
    bounds = [0, *cuts, len(clause)]
    return [clause[start:end] for start, end in zip(bounds, bounds[1:])]


def _unknown_soil_names(masked: str) -> List[str]:
    names: List[str] = []
    for match in _SOIL_LIKE.finditer(masked):
        words = match.group(1).split()
        while words and words[0].lower() in _NON_NAME_WORDS:
            words.pop(0)
        if len(words) >= 2:
            names.append(" ".join(words))
    return names


def _extract_ids(text: str) -> List[int]:
    ids: List[int] = []
    for match in _ID_LIST.finditer(text):
        ids.extend(int(number) for number in _NUMBER.findall(match.group(1)))
    return ids


@dataclass
class _Part:
    samples: List[str] = field(default_factory=list)
    classes: List[SampleClass] = field(default_factory=list)
    hedged: bool = False
    exclusive: bool = False


def _analyse_part(text: str, vocab: _Vocabulary) -> _Part:
    samples, masked = _find_samples(text, vocab)
    samples.extend(name for name in _unknown_soil_names(masked) if name not in samples)
    classes = [cls for cls, pattern in _CLASS_WORDS.items() if pattern.search(masked)]
    return _Part(
        samples=samples,
        classes=classes,
        hedged=bool(_HEDGES.search(masked)),
        exclusive=bool(_EXCLUSIVE.search(masked)),
    )


def _strip_parentheticals(clause: str, vocab: _Vocabulary) -> Tuple[str, List[Tuple[int, str]]]:
    """Drop compound annotations like "(pyrene)"; keep sample lists like "(Orgueil, LEW 85311)"."""
    annotated: List[Tuple[int, str]] = []

    def replace(match: re.Match[str]) -> str:
        inner = match.group(1)
        samples, masked = _find_samples(inner, vocab)
        if samples or _unknown_soil_names(masked):
            return f" {inner} "
        annotated.extend(_find_compounds(inner, vocab))
        return " "

    return _PARENTHETICAL.sub(replace, clause), annotated


def extract_claim_refs(key_datapoints: str, matrix: PresenceMatrix) -> ClaimRefs:
    """Turn a free-text ``key_datapoints`` string into structured references and assertions."""
    if not key_datapoints.strip():
        return ClaimRefs()

    vocab = _Vocabulary.from_matrix(matrix)
    all_samples = matrix.sample_names()
    ids: Set[int] = set()
    names: Set[str] = set()
    sample_refs: Set[str] = set()
    assertions: List[Assertion] = []
    previous_refs: List[CompoundRef] = []

    clauses = (segment for clause in re.split(r"[;\n]", key_datapoints) for segment in _segments(clause, vocab))
    for clause in clauses:
        if not clause.strip():
            continue
        clause_ids = _extract_ids(clause)
        text, annotated = _strip_parentheticals(clause, vocab)
        names.update(name for _, name in annotated)
        ids.update(clause_ids)

        refs: List[CompoundRef]
        if clause_ids:
            refs = list(dict.fromkeys(clause_ids))
        else:
            _, masked = _find_samples(text, vocab)
            found = _find_compounds(masked, vocab)
            names.update(name for _, name in found)
            refs = list(dict.fromkeys(name for _, name in found)) or list(previous_refs)

        negation = _NEGATION.search(text)
        positive = _analyse_part(text[:negation.start()] if negation else text, vocab)
        negative = _analyse_part(text[negation.end():], vocab) if negation else None

        present = list(positive.samples)
        absent: List[str] = list(negative.samples) if negative else []
        if negative and not negative.hedged:
            for sample_class in negative.classes:
                absent.extend(matrix.sample_names(sample_class))
        if positive.exclusive and not positive.hedged and (present or positive.classes):
            if positive.classes:
                others = [c for c in SampleClass if c not in positive.classes]
                for sample_class in others:
                    absent.extend(matrix.sample_names(sample_class))
            else:
                absent.extend(name for name in all_samples if name not in present)

        absent = [name for name in dict.fromkeys(absent) if name not in present]
        for ref in refs:
            for sample in present:
                assertions.append(Assertion(ref, sample, Polarity.PRESENT))
            for sample in absent:
                assertions.append(Assertion(ref, sample, Polarity.ABSENT))
        if refs and (present or absent):
            sample_refs.update(present)
            sample_refs.update(absent)
        if refs:
            previous_refs = list(dict.fromkeys([*previous_refs, *refs]))

    unique = list(dict.fromkeys(assertions))
    refs_out = ClaimRefs(
        compound_ids=frozenset(ids),
        compound_names=frozenset(names | {a.compound for a in unique if isinstance(a.compound, str)}),  # type: ignore[misc]
        sample_names=frozenset(sample_refs),
        assertions=tuple(unique),
    )
    logger.debug(
        "Extracted claim references",
        operation="extract_claim_refs",
        extra_fields={"assertions": len(unique), "ids": sorted(ids)},
    )
    return refs_out


def _resolve_compound(matrix: PresenceMatrix, ref: CompoundRef) -> Optional[int]:
    if isinstance(ref, int):
        return ref if matrix.has_compound(ref) else None
    wanted = ref.strip().lower()
    for compound in matrix.compounds:
        if any(name.lower() == wanted for name in compound.all_names):
            return compound.id
    return None


def _resolve_sample(matrix: PresenceMatrix, name: str) -> Optional[str]:
    if matrix.has_sample(name):
        return name
    wanted = name.strip().lower()
    for sample in matrix.samples:
        if sample.name.lower() == wanted:
            return sample.name
    return None


def _token(ref: CompoundRef) -> str:
    return f"ID {ref}" if isinstance(ref, int) else ref


def verify_grounding(matrix: PresenceMatrix, refs: ClaimRefs) -> GroundingReport:
    """Check every assertion against the presence pairs; unknown ids and names go to unresolved."""
    supported: List[Assertion] = []
    violated: List[Assertion] = []
    unresolved: Dict[str, None] = {}

    for assertion in refs.assertions:
        compound_id = _resolve_compound(matrix, assertion.compound)
        sample = _resolve_sample(matrix, assertion.sample)
        if compound_id is None:
            unresolved[_token(assertion.compound)] = None
        if sample is None:
            unresolved[assertion.sample] = None
        if compound_id is None or sample is None:
            continue
        present = matrix.is_present(compound_id, sample)
        if present == (assertion.polarity is Polarity.PRESENT):
            supported.append(assertion)
        else:
            violated.append(assertion)

    for compound_id in sorted(refs.compound_ids):
        if not matrix.has_compound(compound_id):
            unresolved[_token(compound_id)] = None
    for name in sorted(refs.compound_names):
        if _resolve_compound(matrix, name) is None:
            unresolved[name] = None
    for name in sorted(refs.sample_names):
        if _resolve_sample(matrix, name) is None:
            unresolved[name] = None

    return GroundingReport(tuple(supported), tuple(violated), tuple(unresolved))


def ground_hypothesis(key_datapoints: str, matrix: PresenceMatrix) -> GroundingReport:
    return verify_grounding(matrix, extract_claim_refs(key_datapoints, matrix))
