"""Agent roles and the structured outputs they produce."""

from __future__ import annotations

from enum import Enum
from typing import Dict, List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator

from ..errors import OutputParseError
from .ordinals import word_index


class AgentRole(str, Enum):
    DATA_ANALYST = "DataAnalyst"
    PLANNER = "Planner"
    SCIENTIST = "Scientist"
    ACCUMULATOR = "Accumulator"
    LITERATURE_REVIEWER = "LiteratureReviewer"
    CRITIC = "Critic"


class HypothesisSource(BaseModel):
    """Which agent emitted a hypothesis; index is the scientist number (1 for other roles)."""

    model_config = ConfigDict(frozen=True)

    role: AgentRole
    index: int = Field(default=1, ge=1)

    def label(self) -> str:
        return f"{self.role.value} {self.index}" if self.role is AgentRole.SCIENTIST else self.role.value


class Hypothesis(BaseModel):
    model_config = ConfigDict(frozen=True)

    id: str
    statement: str
    key_datapoints: str
    source: HypothesisSource
    iteration: int = Field(ge=1)
    origin: Optional[HypothesisSource] = None

    @field_validator("statement", "key_datapoints")
    @classmethod
    def _non_empty(cls, value: str) -> str:
        if not value.strip():
            raise ValueError("must be non-empty")
        return value

    @field_validator("id")
    @classmethod
    def _ordinal_id(cls, value: str) -> str:
        try:
            word_index(value)
        except OutputParseError as exc:
            raise ValueError(exc.message) from None
        return value

    @property
    def key(self) -> str:
        """Run-wide identifier: iteration plus per-iteration id."""
        return f"{self.iteration}:{self.id}"

    @property
    def ordinal(self) -> int:
        return word_index(self.id)

    def wire(self) -> Dict[str, str]:
        """The JSON object shape agents exchange."""
        return {"id": self.id, "statement": self.statement, "key_datapoints": self.key_datapoints}


class PlannerPlan(BaseModel):
    model_config = ConfigDict(frozen=True)

    instructions: Tuple[str, ...]

    @field_validator("instructions")
    @classmethod
    def _non_empty(cls, value: Tuple[str, ...]) -> Tuple[str, ...]:
        for position, text in enumerate(value, start=1):
            if not text.strip():
                raise ValueError(f"Agent{position}_instructions is empty")
        return value

    def for_agent(self, index: int) -> str:
        return self.instructions[index - 1]

    def wire(self) -> Dict[str, str]:
        return {f"Agent{k}_instructions": text for k, text in enumerate(self.instructions, start=1)}


class Verdict(str, Enum):
    KEEP = "Keep"
    REVISE = "Revise"
    REJECT = "Reject"


class HypothesisVerdict(BaseModel):
    model_config = ConfigDict(frozen=True)

    verdict: Verdict = Verdict.KEEP
    excerpt: str = ""


class CriticReview(BaseModel):
    model_config = ConfigDict(frozen=True)

    text: str
    per_hypothesis: Dict[str, HypothesisVerdict] = Field(default_factory=dict)

    def verdict_for(self, hypothesis_id: str) -> Verdict:
        entry = self.per_hypothesis.get(hypothesis_id)
        return entry.verdict if entry else Verdict.KEEP

    def rejected(self) -> List[str]:
        return [hid for hid, entry in self.per_hypothesis.items() if entry.verdict is Verdict.REJECT]
