"""Agent roles, prompt templates and output parsing."""

from .dedup import attach_origin, jaccard, non_verbatim_statements, prefilter_duplicates, renumber_final
from .models import (
    AgentRole,
    CriticReview,
    Hypothesis,
    HypothesisSource,
    HypothesisVerdict,
    PlannerPlan,
    Verdict,
)
from .ordinals import final_id, ordinal_word, word_index
from .parsing import (
    extract_json,
    parse_critic,
    parse_hypotheses,
    parse_planner_output,
    serialize_hypotheses,
)
from .prompts import PromptTemplate, load_template, render_prompt, with_json_reminder

__all__ = [
    "AgentRole",
    "CriticReview",
    "Hypothesis",
    "HypothesisSource",
    "HypothesisVerdict",
    "PlannerPlan",
    "PromptTemplate",
    "Verdict",
    "attach_origin",
    "extract_json",
    "final_id",
    "jaccard",
    "load_template",
    "non_verbatim_statements",
    "ordinal_word",
    "parse_critic",
    "parse_hypotheses",
    "parse_planner_output",
    "prefilter_duplicates",
    "render_prompt",
    "renumber_final",
    "serialize_hypotheses",
    "with_json_reminder",
    "word_index",
]
