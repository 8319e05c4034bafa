"""Structured JSON logging with run/iteration/stage context propagation."""

from __future__ import annotations

import json
import logging
import os
import sys
import time
from contextlib import asynccontextmanager, contextmanager
from contextvars import ContextVar
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, AsyncGenerator, Dict, Generator, Optional

_RUN_ID: ContextVar[Optional[str]] = ContextVar("run_id", default=None)
_ITERATION: ContextVar[Optional[int]] = ContextVar("iteration", default=None)
_STAGE: ContextVar[Optional[str]] = ContextVar("stage", default=None)

LOG_LEVEL_ENV = "HYPOAGENTS_LOG_LEVEL"


class LogLevel(str, Enum):
    """Structured log levels."""
    CRITICAL = "CRITICAL"
    ERROR = "ERROR"
    WARNING = "WARNING"
    INFO = "INFO"
    DEBUG = "DEBUG"


class LogComponent(str, Enum):
    """System components for structured logging."""
    ORCHESTRATOR = "orchestrator"
    GATEWAY = "gateway"
    SCHOLAR = "scholar"
    AGENTS = "agents"
    SPECDATA = "specdata"
    CONTEXT = "context"
    EVALUATION = "evaluation"
    CLI = "cli"
    RETRY = "retry"


@dataclass
class LogContext:
    """Structured logging context."""
    run_id: Optional[str] = None
    iteration: Optional[int] = None
    stage: Optional[str] = None
    metadata: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        """Convert context to dictionary for logging."""
        result: Dict[str, Any] = {}
        if self.run_id:
            result["run_id"] = self.run_id
        if self.iteration is not None:
            result["iteration"] = self.iteration
        if self.stage:
            result["stage"] = self.stage
        result.update(self.metadata)
        return result


class StructuredFormatter(logging.Formatter):
    """One JSON object per record."""

    def __init__(self, include_extra: bool = True):
        super().__init__()
        self.include_extra = include_extra

    def format(self, record: logging.LogRecord) -> str:
        payload: Dict[str, Any] = {
            "timestamp": time.time(),
            "level": record.levelname,
            "logger": record.name,
            "message": record.getMessage(),
        }

        context = LogContext(run_id=_RUN_ID.get(), iteration=_ITERATION.get(), stage=_STAGE.get()).to_dict()
        if context:
            payload["context"] = context

        if self.include_extra:
            extra_fields = getattr(record, "extra_fields", None)
            if isinstance(extra_fields, dict):
                payload.update(extra_fields)

        if record.exc_info:
            payload["exception"] = self.formatException(record.exc_info)

        return json.dumps(payload, ensure_ascii=False, default=str)


def _default_level() -> int:
    name = os.getenv(LOG_LEVEL_ENV, "INFO").upper()
    return getattr(logging, name, logging.INFO)


class AgentLogger:
    """Logger bound to one component; writes structured records to stderr."""

    def __init__(self, name: str, component: LogComponent):
        self.logger = logging.getLogger(f"hypoagents.{component.value}.{name}")
        self.component = component
        if not self.logger.handlers:
            handler = logging.StreamHandler(stream=sys.stderr)
            handler.setFormatter(StructuredFormatter())
            self.logger.addHandler(handler)
            self.logger.setLevel(_default_level())
        self.logger.propagate = False

    def _log(
        self,
        level: LogLevel,
        message: str,
        operation: Optional[str] = None,
        extra_fields: Optional[Dict[str, Any]] = None,
        exc_info: bool = False,
    ) -> None:
        fields = {
            "component": self.component.value,
            **({"operation": operation} if operation else {}),
            **(extra_fields or {}),
        }
        self.logger.log(getattr(logging, level.value), message, extra={"extra_fields": fields}, exc_info=exc_info)

    def debug(self, message: str, operation: Optional[str] = None, **kwargs: Any) -> None:
        self._log(LogLevel.DEBUG, message, operation, **kwargs)

    def info(self, message: str, operation: Optional[str] = None, **kwargs: Any) -> None:
        self._log(LogLevel.INFO, message, operation, **kwargs)

    def warning(self, message: str, operation: Optional[str] = None, **kwargs: Any) -> None:
        self._log(LogLevel.WARNING, message, operation, **kwargs)

    def error(self, message: str, operation: Optional[str] = None, **kwargs: Any) -> None:
        self._log(LogLevel.ERROR, message, operation, **kwargs)

    def critical(self, message: str, operation: Optional[str] = None, **kwargs: Any) -> None:
        self._log(LogLevel.CRITICAL, message, operation, **kwargs)

    @contextmanager
    def performance_context(
        self,
        operation: str,
        extra_fields: Optional[Dict[str, Any]] = None
    ) -> Generator[None, None, None]:
        """Log the wall time of the wrapped block."""
        start_time = time.perf_counter()
        try:
            yield
        finally:
            duration = (time.perf_counter() - start_time) * 1000
            self.info(
                f"Operation completed: {operation}",
                operation=operation,
                extra_fields={"duration_ms": duration, **(extra_fields or {})},
            )

    @asynccontextmanager
    async def async_performance_context(
        self,
        operation: str,
        extra_fields: Optional[Dict[str, Any]] = None
    ) -> AsyncGenerator[None, None]:
        """Async variant of performance_context."""
        start_time = time.perf_counter()
        try:
            yield
        finally:
            duration = (time.perf_counter() - start_time) * 1000
            self.info(
                f"Async operation completed: {operation}",
                operation=operation,
                extra_fields={"duration_ms": duration, **(extra_fields or {})},
            )


def get_logger(name: str, component: LogComponent) -> AgentLogger:
    """Get a structured logger for one component."""
    return AgentLogger(name, component)


def set_log_level(level: str) -> None:
    """Apply a level to every engine logger created so far and to those created later."""
    os.environ[LOG_LEVEL_ENV] = level.upper()
    resolved = _default_level()
    for name, logger in logging.Logger.manager.loggerDict.items():
        if name.startswith("hypoagents.") and isinstance(logger, logging.Logger):
            logger.setLevel(resolved)


def current_context() -> LogContext:
    return LogContext(run_id=_RUN_ID.get(), iteration=_ITERATION.get(), stage=_STAGE.get())


@contextmanager
def logging_context(
    run_id: Optional[str] = None,
    iteration: Optional[int] = None,
    stage: Optional[str] = None,
    **metadata: Any
) -> Generator[LogContext, None, None]:
    """Set run/iteration/stage for every record emitted inside the block."""
    tokens = []
    if run_id is not None:
        tokens.append((_RUN_ID, _RUN_ID.set(run_id)))
    if iteration is not None:
        tokens.append((_ITERATION, _ITERATION.set(iteration)))
    if stage is not None:
        tokens.append((_STAGE, _STAGE.set(stage)))

    context = current_context()
    context.metadata.update(metadata)
    try:
        yield context
    finally:
        for var, token in reversed(tokens):
            var.reset(token)


@asynccontextmanager
async def async_logging_context(
    run_id: Optional[str] = None,
    iteration: Optional[int] = None,
    stage: Optional[str] = None,
    **metadata: Any
) -> AsyncGenerator[LogContext, None]:
    """Async variant of logging_context."""
    with logging_context(run_id=run_id, iteration=iteration, stage=stage, **metadata) as context:
        yield context

