"""Provider-agnostic completion entry point with retries, concurrency caps and cost accounting."""

from __future__ import annotations

import asyncio
import time
from pathlib import Path
from typing import Dict, Optional, Tuple

import httpx

from ..errors import InvalidConfigError
from ..logging_utils import LogComponent, get_logger
from ..retry_utils import RetryConfig, RetryState, SleepFunc, retry_async
from .base import ChatBackend
from .http_backend import HttpChatBackend
from .models import ChatExchange, ChatRequest, ProviderKind, ProviderProfile
from .scripted import ScriptedBackend

logger = get_logger("gateway", LogComponent.GATEWAY)


def build_backend(
    profile: ProviderProfile,
    seed: int = 0,
    transport: Optional[httpx.AsyncBaseTransport] = None,
) -> ChatBackend:
    if profile.kind is ProviderKind.SCRIPTED:
        assert profile.script is not None
        return ScriptedBackend.from_file(Path(profile.script), seed=seed, provider_id=profile.provider_id)
    return HttpChatBackend(profile, transport=transport)


class Gateway:
    """Routes requests to registered providers by ``provider_id``."""

    def __init__(self, retry_config: Optional[RetryConfig] = None, sleep: SleepFunc = asyncio.sleep):
        self.retry_config = retry_config or RetryConfig()
        self._sleep = sleep
        self._providers: Dict[str, Tuple[ProviderProfile, ChatBackend, asyncio.Semaphore]] = {}

    @classmethod
    def for_profile(
        cls,
        profile: ProviderProfile,
        seed: int = 0,
        transport: Optional[httpx.AsyncBaseTransport] = None,
        retry_config: Optional[RetryConfig] = None,
        sleep: SleepFunc = asyncio.sleep,
    ) -> "Gateway":
        gateway = cls(retry_config=retry_config, sleep=sleep)
        gateway.register(profile, build_backend(profile, seed=seed, transport=transport))
        return gateway

    def register(self, profile: ProviderProfile, backend: ChatBackend) -> None:
        self._providers[profile.provider_id] = (profile, backend, asyncio.Semaphore(profile.concurrency))

    def profile(self, provider_id: str) -> ProviderProfile:
        return self._entry(provider_id)[0]

    def _entry(self, provider_id: str) -> Tuple[ProviderProfile, ChatBackend, asyncio.Semaphore]:
        try:
            return self._providers[provider_id]
        except KeyError:
            raise InvalidConfigError("provider", f"no provider registered as '{provider_id}'") from None

    async def complete(self, request: ChatRequest) -> ChatExchange:
        """One completion with retry on transient failures.

        Authentication and content errors surface immediately; exhausting the retries
        raises RetryExhaustedError.
        """
        profile, backend, semaphore = self._entry(request.provider_id)
        state = RetryState()
        async with semaphore:
            started = time.perf_counter()
            reply = await retry_async(
                lambda: backend.send(request),
                self.retry_config,
                operation=f"{request.role.value} completion",
                state=state,
                sleep=self._sleep,
            )
            elapsed = time.perf_counter() - started

        exchange = ChatExchange(
            request=request,
            response_text=reply.text,
            input_tokens=reply.input_tokens,
            output_tokens=reply.output_tokens,
            cost=profile.cost(reply.input_tokens, reply.output_tokens),
            latency=elapsed if backend.reports_latency else 0.0,
            attempts=state.attempt,
        )
        logger.info(
            "Completion finished",
            operation="complete",
            extra_fields={
                "provider": profile.provider_id,
                "role": request.role.value,
                "agent_index": request.agent_index,
                "attempts": exchange.attempts,
                "input_tokens": exchange.input_tokens,
                "output_tokens": exchange.output_tokens,
                "cost": exchange.cost,
            },
        )
        return exchange

    async def aclose(self) -> None:
        for _, backend, _ in self._providers.values():
            await backend.aclose()
