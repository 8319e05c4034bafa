"""Chat-completion gateway: providers, scripted backend and cost ledger."""

from .base import ChatBackend
from .gateway import Gateway, build_backend
from .http_backend import HttpChatBackend
from .ledger import CostLedger, cost_by_iteration, cost_by_role, ledger_total, read_exchanges, write_exchanges
from .models import BackendReply, ChatExchange, ChatRequest, ProviderKind, ProviderProfile
from .scripted import ScriptedBackend, ScriptEntry

__all__ = [
    "BackendReply",
    "ChatBackend",
    "ChatExchange",
    "ChatRequest",
    "CostLedger",
    "Gateway",
    "HttpChatBackend",
    "ProviderKind",
    "ProviderProfile",
    "ScriptEntry",
    "ScriptedBackend",
    "build_backend",
    "cost_by_iteration",
    "cost_by_role",
    "ledger_total",
    "read_exchanges",
    "write_exchanges",
]
