"""Literature search: query building, paper-search client and result cache."""

from .cache import ScholarCache, cache_key
from .client import RateLimiter, ScholarClient, parse_search_body
from .models import MAX_SNIPPETS, PaperSnippet, ScholarSettings, SearchResult
from .query import build_query

__all__ = [
    "MAX_SNIPPETS",
    "PaperSnippet",
    "RateLimiter",
    "ScholarCache",
    "ScholarClient",
    "ScholarSettings",
    "SearchResult",
    "build_query",
    "cache_key",
    "parse_search_body",
]
