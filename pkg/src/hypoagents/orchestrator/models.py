"""Run configuration and the records a run produces."""

from __future__ import annotations

from datetime import datetime, timezone
from enum import Enum
from typing import Dict, List, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator

from ..agents.models import CriticReview, Hypothesis, PlannerPlan, Verdict
from ..agents.ordinals import final_id
from ..gateway.ledger import cost_by_iteration, cost_by_role, ledger_total
from ..gateway.models import ChatExchange, ProviderProfile
from ..scholar.models import PaperSnippet, ScholarSettings


def utc_now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


class RunStatus(str, Enum):
    COMPLETED = "Completed"
    FAILED = "Failed"
    IN_PROGRESS = "InProgress"


class RunConfig(BaseModel):
    """Fully resolved run settings; persisted as config.json without secrets."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    iterations: int = Field(default=10, ge=1)
    scientist_count: int = Field(default=3, ge=1)
    snippet_limit: int = Field(default=5, ge=1, le=5)
    provider: ProviderProfile
    context_paths: List[str] = Field(default_factory=list)
    data_path: str
    sample_classes: Dict[str, str] = Field(default_factory=dict)
    user_instructions: str = ""
    output_dir: str = "runs"
    seed: int = 0
    dedup_threshold: float = Field(default=0.9, ge=0, le=1)
    max_reprompts: int = Field(default=2, ge=0)
    cost_limit_usd: Optional[float] = Field(default=None, gt=0)
    scholar: ScholarSettings = Field(default_factory=ScholarSettings)

    @property
    def provider_id(self) -> str:
        return self.provider.provider_id

    @property
    def effective_context_paths(self) -> List[str]:
        """Provider-specific curated context wins over the shared list."""
        if self.provider.context_paths is not None:
            return list(self.provider.context_paths)
        return list(self.context_paths)


class LiteratureDigest(BaseModel):
    model_config = ConfigDict(frozen=True)

    hypothesis_id: str
    query: str
    snippets: List[PaperSnippet] = Field(default_factory=list)
    review: str


class IterationRecord(BaseModel):
    model_config = ConfigDict(frozen=True)

    index: int = Field(ge=1)
    analyst_text: str
    plan: PlannerPlan
    scientist_outputs: List[List[Hypothesis]]
    dropped: List[Hypothesis] = Field(default_factory=list)
    accumulated: List[Hypothesis]
    non_verbatim: List[str] = Field(default_factory=list)
    literature: List[LiteratureDigest] = Field(default_factory=list)
    critic: CriticReview
    exchanges: List[ChatExchange] = Field(default_factory=list)

    @field_validator("accumulated")
    @classmethod
    def _sequential_final_ids(cls, value: List[Hypothesis]) -> List[Hypothesis]:
        for position, hypothesis in enumerate(value, start=1):
            if hypothesis.id != final_id(position):
                raise ValueError(f"accumulated hypothesis {position} has id {hypothesis.id}, expected {final_id(position)}")
        return value

    @property
    def cost(self) -> float:
        return ledger_total(self.exchanges)

    def literature_text(self) -> str:
        return render_literature(self.literature)


LITERATURE_SEPARATOR = "\n===\n"


def render_literature(digests: List[LiteratureDigest]) -> str:
    return LITERATURE_SEPARATOR.join(f"**Hypothesis {d.hypothesis_id}:**\n{d.review}" for d in digests)


class RunRecord(BaseModel):
    run_id: str
    config: RunConfig
    iterations: List[IterationRecord] = Field(default_factory=list)
    status: RunStatus = RunStatus.IN_PROGRESS
    created_at: str = Field(default_factory=utc_now)
    updated_at: str = Field(default_factory=utc_now)
    failed_stage: Optional[str] = None
    failure: Optional[str] = None

    def all_exchanges(self) -> List[ChatExchange]:
        return [exchange for iteration in self.iterations for exchange in iteration.exchanges]

    @property
    def total_cost(self) -> float:
        return ledger_total(self.all_exchanges())

    def cost_by_role(self) -> Dict[str, float]:
        return cost_by_role(self.all_exchanges())

    def cost_by_iteration(self) -> Dict[str, float]:
        return cost_by_iteration(self.all_exchanges())

    def hypothesis_counts(self) -> List[int]:
        return [len(iteration.accumulated) for iteration in self.iterations]

    def rejection_counts(self) -> List[int]:
        return [
            sum(1 for h in iteration.accumulated if iteration.critic.verdict_for(h.id) is Verdict.REJECT)
            for iteration in self.iterations
        ]

    @property
    def last_critique(self) -> str:
        return self.iterations[-1].critic.text if self.iterations else ""


class RunManifest(BaseModel):
    """Summary written to manifest.json after every state change."""

    model_config = ConfigDict(extra="forbid")

    run_id: str
    status: RunStatus
    iterations_planned: int = Field(ge=1)
    iterations_completed: int = Field(ge=0)
    total_cost: float = Field(ge=0)
    cost_by_role: Dict[str, float] = Field(default_factory=dict)
    cost_by_iteration: Dict[str, float] = Field(default_factory=dict)
    hypothesis_counts: List[int] = Field(default_factory=list)
    rejection_counts: List[int] = Field(default_factory=list)
    failed_stage: Optional[str] = None
    failure: Optional[str] = None
    created_at: str
    updated_at: str

    @classmethod
    def from_record(cls, record: RunRecord) -> "RunManifest":
        return cls(
            run_id=record.run_id,
            status=record.status,
            iterations_planned=record.config.iterations,
            iterations_completed=len(record.iterations),
            total_cost=record.total_cost,
            cost_by_role=record.cost_by_role(),
            cost_by_iteration=record.cost_by_iteration(),
            hypothesis_counts=record.hypothesis_counts(),
            rejection_counts=record.rejection_counts(),
            failed_stage=record.failed_stage,
            failure=record.failure,
            created_at=record.created_at,
            updated_at=record.updated_at,
        )
