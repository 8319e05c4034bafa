"""Retry and backoff utilities for provider and literature-search calls."""

from __future__ import annotations

import asyncio
import random
from dataclasses import dataclass, field
from enum import Enum
from typing import Awaitable, Callable, List, Optional, Tuple, Type, TypeVar

from .errors import NetworkError, RateLimitError, RetryExhaustedError
from .logging_utils import LogComponent, get_logger

T = TypeVar("T")

logger = get_logger("retry_utils", LogComponent.RETRY)

SleepFunc = Callable[[float], Awaitable[None]]


class BackoffStrategy(str, Enum):
    """Backoff strategies for retry delays."""
    FIXED = "fixed"
    LINEAR = "linear"
    EXPONENTIAL = "exponential"


@dataclass
class RetryConfig:
    """Configuration for retry behavior.

    The defaults are the provider policy: five attempts, delays of 1, 2, 4 and 8 seconds.
    """
    max_attempts: int = 5
    base_delay: float = 1.0
    factor: float = 2.0
    max_delay: float = 60.0
    strategy: BackoffStrategy = BackoffStrategy.EXPONENTIAL
    jitter: bool = False
    jitter_max: float = 0.1
    retryable_errors: Tuple[Type[BaseException], ...] = (NetworkError,)
    non_retryable_errors: Tuple[Type[BaseException], ...] = ()

    def __post_init__(self) -> None:
        if self.max_attempts < 1:
            raise ValueError("max_attempts must be at least 1")
        if self.base_delay < 0 or self.factor < 1:
            raise ValueError("base_delay must be >= 0 and factor >= 1")


@dataclass
class RetryState:
    """State tracking for one retried operation."""
    attempt: int = 0
    delays: List[float] = field(default_factory=list)
    last_error: Optional[BaseException] = None

    @property
    def total_delay(self) -> float:
        return sum(self.delays)

    def should_retry(self, config: RetryConfig, error: BaseException) -> bool:
        if self.attempt >= config.max_attempts:
            return False
        if isinstance(error, config.non_retryable_errors):
            return False
        return isinstance(error, config.retryable_errors)

    def calculate_delay(self, config: RetryConfig) -> float:
        """Delay before the next attempt; non-decreasing in the attempt number."""
        exponent = max(self.attempt - 1, 0)
        if config.strategy == BackoffStrategy.FIXED:
            delay = config.base_delay
        elif config.strategy == BackoffStrategy.LINEAR:
            delay = config.base_delay * (exponent + 1)
        else:
            delay = config.base_delay * (config.factor ** exponent)

        delay = min(delay, config.max_delay)
        if config.jitter:
            delay += delay * config.jitter_max * random.random()
        # jitter must not make the sequence decrease
        if self.delays:
            delay = max(delay, self.delays[-1])
        return delay


async def retry_async(
    func: Callable[[], Awaitable[T]],
    config: Optional[RetryConfig] = None,
    *,
    operation: str = "operation",
    state: Optional[RetryState] = None,
    sleep: SleepFunc = asyncio.sleep,
) -> T:
    """Run ``func`` until it succeeds, a non-retryable error occurs or attempts run out.

    Non-retryable errors propagate unchanged. Exhausting the attempts on a retryable
    error raises RetryExhaustedError carrying the last error. A RateLimitError that
    carries a server Retry-After hint waits at least that long, up to ``max_delay``.
    """
    config = config or RetryConfig()
    state = state if state is not None else RetryState()

    while True:
        state.attempt += 1
        try:
            return await func()
        except Exception as error:
            state.last_error = error
            if not isinstance(error, config.retryable_errors) or isinstance(error, config.non_retryable_errors):
                logger.error(
                    f"Non-retryable error in {operation}",
                    operation="retry_async",
                    extra_fields={"error_type": type(error).__name__, "attempts": state.attempt},
                )
                raise
            if not state.should_retry(config, error):
                logger.error(
                    f"{operation} exhausted {state.attempt} attempts",
                    operation="retry_async",
                    extra_fields={"error_type": type(error).__name__, "attempts": state.attempt},
                )
                raise RetryExhaustedError(operation, state.attempt, error) from error

            delay = state.calculate_delay(config)
            if isinstance(error, RateLimitError) and error.retry_after_seconds:
                delay = max(delay, min(error.retry_after_seconds, config.max_delay))
            state.delays.append(delay)
            logger.warning(
                f"Attempt {state.attempt} of {operation} failed, retrying in {delay:.2f}s",
                operation="retry_async",
                extra_fields={
                    "error_type": type(error).__name__,
                    "attempt": state.attempt,
                    "max_attempts": config.max_attempts,
                    "delay_seconds": delay,
                },
            )
            await sleep(delay)
