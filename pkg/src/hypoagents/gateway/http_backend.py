"""HTTPS JSON chat backend driven by a ProviderProfile."""

from __future__ import annotations

import json
import os
from typing import Any, Dict, Optional

import httpx

from ..context import estimate_tokens
from ..errors import (
    AuthenticationError,
    NetworkError,
    ProviderContentError,
    RateLimitError,
    UpstreamAPIError,
)
from ..logging_utils import LogComponent, get_logger
from .base import ChatBackend
from .models import BackendReply, ChatRequest, ProviderProfile

logger = get_logger("http_backend", LogComponent.GATEWAY)

_MISSING = object()


def lookup_path(data: Any, path: str) -> Any:
    """Follow a dotted path through dicts and lists; integer segments index lists."""
    current = data
    for segment in path.split("."):
        if isinstance(current, list) and segment.isdigit():
            index = int(segment)
            if index >= len(current):
                return _MISSING
            current = current[index]
        elif isinstance(current, dict) and segment in current:
            current = current[segment]
        else:
            return _MISSING
    return current


def _retry_after(response: httpx.Response) -> Optional[float]:
    value = response.headers.get("retry-after")
    try:
        return float(value) if value is not None else None
    except ValueError:
        return None


class HttpChatBackend(ChatBackend):
    def __init__(
        self,
        profile: ProviderProfile,
        transport: Optional[httpx.AsyncBaseTransport] = None,
        api_key: Optional[str] = None,
    ):
        self.profile = profile
        self._transport = transport
        self._api_key = api_key
        self._client: Optional[httpx.AsyncClient] = None

    @property
    def name(self) -> str:
        return self.profile.provider_id

    def _client_for_request(self) -> httpx.AsyncClient:
        if self._client is None:
            self._client = httpx.AsyncClient(transport=self._transport, timeout=self.profile.timeout_seconds)
        return self._client

    def _headers(self) -> Dict[str, str]:
        headers = {"Content-Type": "application/json"}
        if not self.profile.api_key_env:
            return headers
        api_key = self._api_key or os.getenv(self.profile.api_key_env)
        if not api_key:
            raise AuthenticationError(
                f"Environment variable {self.profile.api_key_env} is not set",
                provider=self.profile.provider_id,
            )
        headers[self.profile.auth_header] = (
            f"{self.profile.auth_scheme} {api_key}" if self.profile.auth_scheme else api_key
        )
        return headers

    def _payload(self, request: ChatRequest) -> Dict[str, Any]:
        payload: Dict[str, Any] = {
            "messages": [{"role": self.profile.message_role, "content": request.system_prompt}],
            self.profile.max_tokens_field: request.max_output_tokens,
            "temperature": request.temperature,
        }
        if self.profile.model:
            payload["model"] = self.profile.model
        return payload

    def _raise_for_status(self, response: httpx.Response) -> None:
        status = response.status_code
        if status < 400:
            return
        provider = self.profile.provider_id
        body = response.text[:500]
        if status in (401, 403):
            raise AuthenticationError(f"Provider rejected credentials (HTTP {status})", provider=provider)
        if status == 429:
            raise RateLimitError(
                "Provider rate limit exceeded",
                provider=provider,
                retry_after_seconds=_retry_after(response),
                endpoint=self.profile.endpoint,
            )
        if status >= 500:
            raise UpstreamAPIError(
                f"Provider server error (HTTP {status}): {body}",
                provider=provider,
                endpoint=self.profile.endpoint,
                status_code=status,
            )
        raise ProviderContentError(f"Provider rejected request (HTTP {status}): {body}", provider, status)

    def _tokens(self, data: Any, path: str, fallback_text: str) -> int:
        value = lookup_path(data, path)
        if isinstance(value, int) and value >= 0:
            return value
        logger.warning(
            "Usage field missing, estimating tokens from characters",
            operation="send",
            extra_fields={"provider": self.profile.provider_id, "path": path},
        )
        return estimate_tokens(fallback_text)

    async def send(self, request: ChatRequest) -> BackendReply:
        assert self.profile.endpoint is not None
        headers = self._headers()
        payload_json = json.dumps(self._payload(request), ensure_ascii=False)
        client = self._client_for_request()

        logger.debug(
            "Sending chat request",
            operation="send",
            extra_fields={
                "provider": self.profile.provider_id,
                "role": request.role.value,
                "estimated_tokens": estimate_tokens(request.system_prompt),
            },
        )
        try:
            response = await client.post(self.profile.endpoint, content=payload_json.encode("utf-8"), headers=headers)
        except httpx.TimeoutException as exc:
            raise NetworkError(f"Provider request timed out: {exc}", url=self.profile.endpoint) from exc
        except httpx.TransportError as exc:
            raise NetworkError(f"Transport error: {exc}", url=self.profile.endpoint) from exc

        self._raise_for_status(response)

        try:
            data = response.json()
        except ValueError as exc:
            raise ProviderContentError("Provider response is not JSON", self.profile.provider_id,
                                       response.status_code) from exc
        text = lookup_path(data, self.profile.text_path)
        if text is _MISSING or not isinstance(text, str):
            raise ProviderContentError(
                f"Provider response has no text at '{self.profile.text_path}'",
                self.profile.provider_id,
                response.status_code,
            )
        return BackendReply(
            text=text,
            input_tokens=self._tokens(data, self.profile.input_tokens_path, request.system_prompt),
            output_tokens=self._tokens(data, self.profile.output_tokens_path, text),
        )

    async def aclose(self) -> None:
        if self._client is not None:
            await self._client.aclose()
            self._client = None
