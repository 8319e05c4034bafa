"""Deterministic backend answering from a script of canned responses."""

from __future__ import annotations

import json
import random
from pathlib import Path
from typing import Any, List, Optional, Sequence, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from ..agents.models import AgentRole
from ..context import estimate_tokens
from ..errors import InvalidConfigError, ScriptMissError
from ..logging_utils import LogComponent, get_logger
from .base import ChatBackend
from .models import BackendReply, ChatRequest

logger = get_logger("scripted", LogComponent.GATEWAY)


class ScriptEntry(BaseModel):
    """One canned response. Unset selectors match anything."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    role: AgentRole
    iteration: Optional[int] = Field(default=None, ge=1)
    index: Optional[int] = Field(default=None, ge=1)
    attempt: Optional[int] = Field(default=None, ge=1)
    text: Union[str, List[str]]

    @field_validator("text")
    @classmethod
    def _has_text(cls, value: Union[str, List[str]]) -> Union[str, List[str]]:
        if isinstance(value, list) and not value:
            raise ValueError("text variants must not be empty")
        return value

    @property
    def specificity(self) -> int:
        return sum(selector is not None for selector in (self.iteration, self.index, self.attempt))

    def matches(self, request: ChatRequest) -> bool:
        return (
            self.role is request.role
            and self.iteration in (None, request.iteration)
            and self.index in (None, request.agent_index)
            and self.attempt in (None, request.attempt)
        )


class ScriptedBackend(ChatBackend):
    reports_latency = False

    def __init__(self, entries: Sequence[ScriptEntry], seed: int = 0, provider_id: str = "scripted"):
        self.entries = list(entries)
        self.seed = seed
        self._provider_id = provider_id

    @property
    def name(self) -> str:
        return self._provider_id

    @classmethod
    def from_file(cls, path: Path | str, seed: int = 0, provider_id: str = "scripted") -> "ScriptedBackend":
        """Load a script: a JSON list of entries or an object with a "responses" list."""
        script_path = Path(path)
        try:
            raw: Any = json.loads(script_path.read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise InvalidConfigError("provider.script", f"cannot read {script_path}: {exc}") from exc
        items = raw.get("responses") if isinstance(raw, dict) else raw
        if not isinstance(items, list):
            raise InvalidConfigError("provider.script", f"{script_path} holds no list of responses")
        try:
            entries = [ScriptEntry.model_validate(item) for item in items]
        except ValidationError as exc:
            raise InvalidConfigError("provider.script", f"{script_path}: {exc}") from exc
        return cls(entries, seed=seed, provider_id=provider_id)

    def resolve(self, request: ChatRequest) -> str:
        """Most specific matching entry wins; ties go to the earliest entry."""
        best: Optional[ScriptEntry] = None
        for entry in self.entries:
            if entry.matches(request) and (best is None or entry.specificity > best.specificity):
                best = entry
        if best is None:
            raise ScriptMissError(request.role.value, request.iteration, request.agent_index, request.attempt)
        if isinstance(best.text, str):
            return best.text
        chooser = random.Random(f"{self.seed}:{request.role.value}:{request.iteration}:{request.agent_index}")
        return chooser.choice(best.text)

    async def send(self, request: ChatRequest) -> BackendReply:
        text = self.resolve(request)
        logger.debug(
            "Scripted response served",
            operation="send",
            extra_fields={"role": request.role.value, "iteration": request.iteration,
                          "index": request.agent_index, "attempt": request.attempt},
        )
        return BackendReply(
            text=text,
            input_tokens=estimate_tokens(request.system_prompt),
            output_tokens=estimate_tokens(text),
        )
