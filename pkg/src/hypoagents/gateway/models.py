"""Provider profiles and the request/response records of one chat exchange."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import List, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from ..agents.models import AgentRole


class ProviderKind(str, Enum):
    HTTP = "http"
    SCRIPTED = "scripted"


class ProviderProfile(BaseModel):
    """Declarative description of one chat provider.

    HTTP providers are mapped onto a single "chat" request shape: one message carrying the
    rendered prompt, a max-tokens field and a temperature. Response fields are located with
    dotted paths where integer segments index lists.
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    provider_id: str
    kind: ProviderKind = ProviderKind.HTTP
    endpoint: Optional[str] = None
    model: str = ""
    api_key_env: str = "LLM_API_KEY"
    auth_header: str = "Authorization"
    auth_scheme: str = "Bearer"
    message_role: str = "user"
    text_path: str = "choices.0.message.content"
    input_tokens_path: str = "usage.prompt_tokens"
    output_tokens_path: str = "usage.completion_tokens"
    max_tokens_field: str = "max_tokens"
    rate_in: float = Field(default=0.0, ge=0)
    rate_out: float = Field(default=0.0, ge=0)
    concurrency: int = Field(default=4, ge=1)
    timeout_seconds: float = Field(default=120.0, gt=0)
    max_output_tokens: int = Field(default=4096, ge=1)
    context_budget: int = Field(default=200_000, ge=1)
    context_paths: Optional[List[str]] = None
    script: Optional[str] = None

    @model_validator(mode="after")
    def _kind_requirements(self) -> "ProviderProfile":
        if self.kind is ProviderKind.HTTP and not self.endpoint:
            raise ValueError(f"provider '{self.provider_id}' of kind http needs an endpoint")
        if self.kind is ProviderKind.SCRIPTED and not self.script:
            raise ValueError(f"provider '{self.provider_id}' of kind scripted needs a script file")
        return self

    def cost(self, input_tokens: int, output_tokens: int) -> float:
        return input_tokens * self.rate_in + output_tokens * self.rate_out


class ChatRequest(BaseModel):
    model_config = ConfigDict(frozen=True)

    role: AgentRole
    system_prompt: str
    provider_id: str
    max_output_tokens: int = Field(default=4096, ge=1)
    temperature: float = Field(default=0.7, ge=0)
    iteration: int = Field(default=1, ge=1)
    # scientist number, or hypothesis ordinal for literature reviews
    agent_index: int = Field(default=1, ge=1)
    # 1 for the first prompt, incremented on each re-prompt
    attempt: int = Field(default=1, ge=1)

    @field_validator("system_prompt")
    @classmethod
    def _non_empty(cls, value: str) -> str:
        if not value.strip():
            raise ValueError("system_prompt must be non-empty")
        return value


class ChatExchange(BaseModel):
    """One completed request with usage, cost and timing."""

    model_config = ConfigDict(frozen=True)

    request: ChatRequest
    response_text: str
    input_tokens: int = Field(ge=0)
    output_tokens: int = Field(ge=0)
    cost: float = Field(ge=0)
    latency: float = Field(default=0.0, ge=0)
    attempts: int = Field(default=1, ge=1)
    seq: int = Field(default=0, ge=0)


@dataclass(frozen=True)
class BackendReply:
    text: str
    input_tokens: int
    output_tokens: int
