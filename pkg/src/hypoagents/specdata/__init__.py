"""Presence-matrix parsing, queries and hypothesis grounding."""

from .grounding import extract_claim_refs, ground_hypothesis, verify_grounding
from .models import (
    Assertion,
    ClaimRefs,
    Compound,
    GroundingReport,
    Polarity,
    PresenceMatrix,
    Sample,
    SampleClass,
)
from .parser import (
    from_json,
    load_presence_table,
    parse_presence_table,
    to_csv,
    to_json,
    to_latex,
)
from .queries import co_occurring, exclusive_compounds, samples_of

__all__ = [
    "Assertion",
    "ClaimRefs",
    "Compound",
    "GroundingReport",
    "Polarity",
    "PresenceMatrix",
    "Sample",
    "SampleClass",
    "co_occurring",
    "exclusive_compounds",
    "extract_claim_refs",
    "from_json",
    "ground_hypothesis",
    "load_presence_table",
    "parse_presence_table",
    "samples_of",
    "to_csv",
    "to_json",
    "to_latex",
    "verify_grounding",
]
