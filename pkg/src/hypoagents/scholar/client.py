"""Paper-search client with rate limiting, retries and an on-disk cache."""

from __future__ import annotations

import asyncio
import os
import time
from typing import Any, Callable, Dict, List, Optional

import httpx

from ..errors import NetworkError, RateLimitError, ScholarResponseError, UpstreamAPIError
from ..logging_utils import LogComponent, get_logger
from ..retry_utils import RetryConfig, RetryState, SleepFunc, retry_async
from .cache import ScholarCache
from .models import ABSTRACT_EXCERPT_CHARS, MAX_SNIPPETS, PaperSnippet, ScholarSettings, SearchResult

logger = get_logger("client", LogComponent.SCHOLAR)

SEARCH_FIELDS = "title,abstract,year,externalIds"
SERVICE = "semanticscholar"


class RateLimiter:
    """Spaces outbound requests at least 1/requests_per_second apart."""

    def __init__(
        self,
        requests_per_second: float = 1.0,
        clock: Callable[[], float] = time.monotonic,
        sleep: SleepFunc = asyncio.sleep,
    ):
        if requests_per_second <= 0:
            raise ValueError("requests_per_second must be positive")
        self.interval = 1.0 / requests_per_second
        self._clock = clock
        self._sleep = sleep
        self._lock = asyncio.Lock()
        self._next_allowed: Optional[float] = None
        self.issued: List[float] = []

    async def acquire(self) -> None:
        async with self._lock:
            now = self._clock()
            start = now if self._next_allowed is None else max(now, self._next_allowed)
            if start > now:
                await self._sleep(start - now)
            self._next_allowed = start + self.interval
            self.issued.append(start)


def _external_id(item: Dict[str, Any]) -> str:
    ids = item.get("externalIds") or {}
    if isinstance(ids, dict):
        if ids.get("DOI"):
            return f"DOI:{ids['DOI']}"
        if ids.get("CorpusId") is not None:
            return f"CorpusId:{ids['CorpusId']}"
    return str(item.get("paperId") or "")


def parse_search_body(body: Any, limit: int) -> List[PaperSnippet]:
    """Snippets from a /paper/search response body; untitled entries are skipped."""
    if not isinstance(body, dict):
        raise ScholarResponseError("Search response is not a JSON object")
    if "data" not in body:
        if "total" in body:
            return []
        raise ScholarResponseError("Search response has no 'data' field")
    items = body["data"]
    if not isinstance(items, list):
        raise ScholarResponseError("Search response 'data' is not a list")

    snippets: List[PaperSnippet] = []
    for item in items:
        if not isinstance(item, dict):
            raise ScholarResponseError("Search response entry is not an object")
        title = item.get("title")
        if not isinstance(title, str) or not title.strip():
            continue
        abstract = item.get("abstract")
        year = item.get("year")
        snippets.append(PaperSnippet(
            title=title,
            abstract_excerpt=abstract[:ABSTRACT_EXCERPT_CHARS] if isinstance(abstract, str) else "",
            year=year if isinstance(year, int) else None,
            external_id=_external_id(item),
        ))
        if len(snippets) == limit:
            break
    return snippets


class ScholarClient:
    def __init__(
        self,
        settings: Optional[ScholarSettings] = None,
        cache: Optional[ScholarCache] = None,
        transport: Optional[httpx.AsyncBaseTransport] = None,
        retry_config: Optional[RetryConfig] = None,
        clock: Callable[[], float] = time.monotonic,
        sleep: SleepFunc = asyncio.sleep,
        api_key: Optional[str] = None,
    ):
        self.settings = settings or ScholarSettings()
        self.cache = cache if cache is not None else (
            ScholarCache(self.settings.cache_dir) if self.settings.cache_dir else None
        )
        self.retry_config = retry_config or RetryConfig()
        self.limiter = RateLimiter(self.settings.requests_per_second, clock=clock, sleep=sleep)
        self._sleep = sleep
        self._transport = transport
        self._api_key = api_key if api_key is not None else os.getenv(self.settings.api_key_env)
        self._client: Optional[httpx.AsyncClient] = None
        self.requests_sent = 0

    async def __aenter__(self) -> "ScholarClient":
        return self

    async def __aexit__(self, *exc_info: object) -> None:
        await self.aclose()

    async def aclose(self) -> None:
        if self._client is not None:
            await self._client.aclose()
            self._client = None

    def _http(self) -> httpx.AsyncClient:
        if self._client is None:
            headers = {"x-api-key": self._api_key} if self._api_key else {}
            self._client = httpx.AsyncClient(
                transport=self._transport,
                headers=headers,
                timeout=self.settings.timeout_seconds,
            )
        return self._client

    async def _fetch_once(self, query: str, limit: int) -> Any:
        await self.limiter.acquire()
        self.requests_sent += 1
        url = f"{self.settings.base_url.rstrip('/')}/paper/search"
        try:
            response = await self._http().get(
                url, params={"query": query, "limit": limit, "fields": SEARCH_FIELDS}
            )
        except httpx.TransportError as exc:
            raise NetworkError(f"Paper search transport error: {exc}", url=url) from exc

        if response.status_code == 429:
            raise RateLimitError("Paper search rate limited", provider=SERVICE, endpoint=url)
        if response.status_code >= 500:
            raise UpstreamAPIError(
                f"Paper search server error (HTTP {response.status_code})",
                provider=SERVICE,
                endpoint=url,
                status_code=response.status_code,
            )
        if response.status_code >= 400:
            raise ScholarResponseError(f"Paper search rejected query (HTTP {response.status_code})")
        try:
            return response.json()
        except ValueError as exc:
            raise ScholarResponseError("Paper search response is not JSON") from exc

    async def search(self, query: str, limit: int = MAX_SNIPPETS) -> SearchResult:
        """At most five snippets for ``query``; larger limits are clamped."""
        if limit < 1:
            raise ValueError("limit must be positive")
        effective = min(limit, MAX_SNIPPETS)

        if not query.strip():
            return SearchResult(query=query)

        if self.cache is not None:
            cached = self.cache.get(query, effective)
            if cached is not None:
                logger.debug("Search served from cache", operation="search",
                             extra_fields={"query": query[:80]})
                return cached

        if self.settings.offline:
            logger.warning(
                "Offline mode: no cached result for query",
                operation="search",
                extra_fields={"query": query[:80]},
            )
            return SearchResult(query=query)

        body = await retry_async(
            lambda: self._fetch_once(query, effective),
            self.retry_config,
            operation="paper search",
            state=RetryState(),
            sleep=self._sleep,
        )
        result = SearchResult(query=query, snippets=parse_search_body(body, effective))
        if self.cache is not None:
            self.cache.put(result, effective)
        logger.info(
            "Search completed",
            operation="search",
            extra_fields={"query": query[:80], "snippets": len(result.snippets)},
        )
        return result
