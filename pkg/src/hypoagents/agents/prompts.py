"""Role prompt templates with {SLOT} markers."""

from __future__ import annotations

import re
from functools import lru_cache
from importlib import resources
from typing import Mapping, Set

from pydantic import BaseModel, ConfigDict, computed_field

from ..errors import MissingSlotError, TemplateError
from .models import AgentRole

SLOT_PATTERN = re.compile(r"\{([A-Z][A-Z0-9_]*)\}")

KNOWN_SLOTS = frozenset({
    "SELECTED_PAPERS",
    "INPUT_DATA",
    "CRITIC_FEEDBACK",
    "AGENT_ID",
    "AGENT_INSTRUCTION",
    "DATA_ANALYSIS",
    "HYPOTHESES",
    "SEARCH_RESULTS",
    "LITERATURE_REVIEW",
})

TEMPLATE_FILES = {
    AgentRole.DATA_ANALYST: "data_analyst.txt",
    AgentRole.PLANNER: "planner.txt",
    AgentRole.SCIENTIST: "scientist.txt",
    AgentRole.ACCUMULATOR: "accumulator.txt",
    AgentRole.LITERATURE_REVIEWER: "literature_reviewer.txt",
    AgentRole.CRITIC: "critic.txt",
}

JSON_REMINDER = "IMPORTANT: respond ONLY with valid JSON, with no additional text before or after."


class PromptTemplate(BaseModel):
    model_config = ConfigDict(frozen=True)

    role: AgentRole
    body: str

    @computed_field  # type: ignore[prop-decorator]
    @property
    def slots(self) -> Set[str]:
        return set(SLOT_PATTERN.findall(self.body))

    def render(self, bindings: Mapping[str, str]) -> str:
        return render_prompt(self, bindings)


def render_prompt(template: PromptTemplate, bindings: Mapping[str, str]) -> str:
    """Substitute every slot in a single pass; bound values are inserted verbatim."""
    missing = sorted(template.slots - set(bindings))
    if missing:
        raise MissingSlotError(missing[0])
    return SLOT_PATTERN.sub(lambda match: bindings[match.group(1)], template.body)


@lru_cache(maxsize=None)
def load_template(role: AgentRole) -> PromptTemplate:
    """Load a shipped template from package data."""
    filename = TEMPLATE_FILES[role]
    try:
        body = resources.files(__package__).joinpath("templates", filename).read_text(encoding="utf-8")
    except (FileNotFoundError, OSError) as exc:
        raise TemplateError(f"Template {filename} could not be loaded: {exc}") from exc
    template = PromptTemplate(role=role, body=body)
    unknown = template.slots - KNOWN_SLOTS
    if unknown:
        raise TemplateError(f"Template {filename} uses unknown slots: {', '.join(sorted(unknown))}")
    return template


def with_json_reminder(prompt: str) -> str:
    return f"{prompt}\n\n{JSON_REMINDER}"
