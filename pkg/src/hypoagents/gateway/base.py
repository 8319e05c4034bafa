"""Backend interface every chat provider implements."""

from __future__ import annotations

from abc import ABC, abstractmethod

from .models import BackendReply, ChatRequest


class ChatBackend(ABC):
    # wall-clock latency is meaningless for canned responses
    reports_latency: bool = True

    @property
    @abstractmethod
    def name(self) -> str:
        """Provider id this backend serves."""

    @abstractmethod
    async def send(self, request: ChatRequest) -> BackendReply:
        """Perform one attempt. Transient failures raise NetworkError subclasses."""

    async def aclose(self) -> None:
        return None
