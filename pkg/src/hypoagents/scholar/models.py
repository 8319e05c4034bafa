"""Literature-search records and client settings."""

from __future__ import annotations

from datetime import datetime, timezone
from typing import List, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator

MAX_SNIPPETS = 5
ABSTRACT_EXCERPT_CHARS = 600


class PaperSnippet(BaseModel):
    model_config = ConfigDict(frozen=True)

    title: str
    abstract_excerpt: str = ""
    year: Optional[int] = None
    external_id: str = ""

    @field_validator("title")
    @classmethod
    def _title_present(cls, value: str) -> str:
        if not value.strip():
            raise ValueError("title must be non-empty")
        return value

    def render(self) -> str:
        year = f" ({self.year})" if self.year is not None else ""
        return f"Title: {self.title}{year}\nAbstract: {self.abstract_excerpt}"


class SearchResult(BaseModel):
    model_config = ConfigDict(frozen=True)

    query: str
    snippets: List[PaperSnippet] = Field(default_factory=list)
    fetched_at: datetime = Field(default_factory=lambda: datetime.now(timezone.utc))
    from_cache: bool = False

    def render(self) -> str:
        """Text bound to the SEARCH_RESULTS slot."""
        if not self.snippets:
            return "No relevant papers were found."
        return "\n\n".join(f"[{n}] {snippet.render()}" for n, snippet in enumerate(self.snippets, start=1))

    def same_content(self, other: "SearchResult") -> bool:
        return self.query == other.query and self.snippets == other.snippets


class ScholarSettings(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    base_url: str = "https://api.semanticscholar.org/graph/v1"
    api_key_env: str = "S2_API_KEY"
    requests_per_second: float = Field(default=1.0, gt=0)
    cache_dir: Optional[str] = None
    offline: bool = False
    timeout_seconds: float = Field(default=30.0, gt=0)
