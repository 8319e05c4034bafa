"""Error hierarchy for the hypothesis-generation engine."""

from __future__ import annotations

from enum import Enum
from typing import Any, Dict, Iterable, List, Optional


class ErrorSeverity(str, Enum):
    """Error severity levels."""
    LOW = "low"
    MEDIUM = "medium"
    HIGH = "high"
    CRITICAL = "critical"


class ErrorCategory(str, Enum):
    """Error categories for classification."""
    CONFIGURATION = "configuration"
    DATA = "data"
    CONTEXT = "context"
    PARSE = "parse"
    NETWORK = "network"
    PROVIDER = "provider"
    SCHOLAR = "scholar"
    PERSISTENCE = "persistence"
    EVALUATION = "evaluation"
    BUDGET = "budget"
    UNKNOWN = "unknown"


class AgentError(Exception):
    """Base exception for all engine failures."""

    def __init__(
        self,
        message: str,
        category: ErrorCategory = ErrorCategory.UNKNOWN,
        severity: ErrorSeverity = ErrorSeverity.MEDIUM,
        metadata: Optional[Dict[str, Any]] = None,
        cause: Optional[BaseException] = None,
    ):
        super().__init__(message)
        self.message = message
        self.category = category
        self.severity = severity
        self.metadata = metadata or {}
        self.cause = cause

    def to_dict(self) -> Dict[str, Any]:
        """Convert error to dictionary for logging."""
        return {
            "error_type": self.__class__.__name__,
            "message": self.message,
            "category": self.category.value,
            "severity": self.severity.value,
            "metadata": self.metadata,
            "cause": str(self.cause) if self.cause else None,
        }


# Configuration Errors
class ConfigurationError(AgentError):
    """Raised when configuration is missing or invalid."""

    def __init__(
        self,
        message: str,
        config_key: Optional[str] = None,
        config_file: Optional[str] = None,
        **kwargs: Any
    ):
        super().__init__(message, category=ErrorCategory.CONFIGURATION, **kwargs)
        self.config_key = config_key
        self.config_file = config_file


class MissingConfigError(ConfigurationError):
    """Raised when required configuration is missing."""

    def __init__(self, config_key: str, config_file: Optional[str] = None, **kwargs: Any):
        message = f"Missing required configuration: {config_key}"
        super().__init__(message, config_key, config_file, **kwargs)


class InvalidConfigError(ConfigurationError):
    """Raised when a configuration value is invalid."""

    def __init__(self, config_key: str, detail: str, config_file: Optional[str] = None, **kwargs: Any):
        super().__init__(f"Invalid configuration for {config_key}: {detail}", config_key, config_file, **kwargs)
        self.detail = detail


# Data Errors
class TableParseError(AgentError):
    """Raised when a presence table cannot be parsed. Names the offending row and/or column."""

    def __init__(
        self,
        message: str,
        row: Optional[int] = None,
        column: Optional[str] = None,
        **kwargs: Any
    ):
        location = []
        if row is not None:
            location.append(f"row {row}")
        if column is not None:
            location.append(f"column '{column}'")
        if location:
            message = f"{message} ({', '.join(location)})"
        super().__init__(message, category=ErrorCategory.DATA, **kwargs)
        self.row = row
        self.column = column


class UnknownReferenceError(AgentError):
    """Raised when a query names a compound id absent from the matrix."""

    def __init__(self, compound_id: int, **kwargs: Any):
        super().__init__(f"Unknown compound id: {compound_id}", category=ErrorCategory.DATA, **kwargs)
        self.compound_id = compound_id


# Context Errors
class DocumentError(AgentError):
    """Raised when a context document is missing, unreadable or empty."""

    def __init__(self, message: str, path: str, **kwargs: Any):
        super().__init__(f"{message}: {path}", category=ErrorCategory.CONTEXT, **kwargs)
        self.path = path


class ContextBudgetError(AgentError):
    """Raised when the selected documents exceed the provider's token budget."""

    def __init__(self, offending: Iterable[str], overage: int, budget: int, **kwargs: Any):
        self.offending: List[str] = list(offending)
        self.overage = overage
        self.budget = budget
        message = (
            f"Context exceeds budget of {budget} tokens by {overage} tokens; "
            f"remove: {', '.join(self.offending)}"
        )
        super().__init__(message, category=ErrorCategory.CONTEXT, **kwargs)


# Agent Output Errors
class TemplateError(AgentError):
    """Raised when a prompt template cannot be loaded or rendered."""

    def __init__(self, message: str, **kwargs: Any):
        super().__init__(message, category=ErrorCategory.PARSE, **kwargs)


class MissingSlotError(TemplateError):
    """Raised when a template slot has no binding."""

    def __init__(self, slot: str, **kwargs: Any):
        super().__init__(f"Missing binding for slot {slot}", **kwargs)
        self.slot = slot


class OutputParseError(AgentError):
    """Raised when agent output does not have the required structure."""

    def __init__(self, message: str, stage: Optional[str] = None, **kwargs: Any):
        super().__init__(message, category=ErrorCategory.PARSE, **kwargs)
        self.stage = stage


# Network and Provider Errors
class NetworkError(AgentError):
    """Base class for transient, retryable transport failures."""

    def __init__(
        self,
        message: str,
        url: Optional[str] = None,
        status_code: Optional[int] = None,
        **kwargs: Any
    ):
        kwargs.setdefault("category", ErrorCategory.NETWORK)
        super().__init__(message, **kwargs)
        self.url = url
        self.status_code = status_code


class UpstreamAPIError(NetworkError):
    """Raised when an upstream service answers with a retryable server error."""

    def __init__(
        self,
        message: str,
        provider: str,
        endpoint: Optional[str] = None,
        **kwargs: Any
    ):
        super().__init__(message, url=endpoint, **kwargs)
        self.provider = provider
        self.endpoint = endpoint


class RateLimitError(UpstreamAPIError):
    """Raised when an upstream service answers HTTP 429."""

    def __init__(
        self,
        message: str,
        provider: str,
        retry_after_seconds: Optional[float] = None,
        **kwargs: Any
    ):
        super().__init__(message, provider, status_code=429, **kwargs)
        self.retry_after_seconds = retry_after_seconds


class AuthenticationError(AgentError):
    """Raised when credentials are missing or rejected."""

    def __init__(self, message: str, provider: str, **kwargs: Any):
        super().__init__(message, category=ErrorCategory.PROVIDER, severity=ErrorSeverity.HIGH, **kwargs)
        self.provider = provider


class ProviderContentError(AgentError):
    """Raised when the provider rejects the request content or answers with an unusable body."""

    def __init__(self, message: str, provider: str, status_code: Optional[int] = None, **kwargs: Any):
        super().__init__(message, category=ErrorCategory.PROVIDER, **kwargs)
        self.provider = provider
        self.status_code = status_code


class ScriptMissError(ProviderContentError):
    """Raised when the scripted backend has no entry for a request."""

    def __init__(self, role: str, iteration: int, index: int, attempt: int, **kwargs: Any):
        super().__init__(
            f"No scripted response for role={role} iteration={iteration} index={index} attempt={attempt}",
            provider="scripted",
            **kwargs,
        )


class RetryExhaustedError(AgentError):
    """Raised when every retry attempt failed."""

    def __init__(self, operation: str, attempts: int, last_error: Optional[BaseException], **kwargs: Any):
        super().__init__(
            f"{operation} failed after {attempts} attempts: {last_error}",
            category=ErrorCategory.NETWORK,
            cause=last_error,
            **kwargs,
        )
        self.operation = operation
        self.attempts = attempts
        self.last_error = last_error


class ScholarResponseError(AgentError):
    """Raised when the paper-search service returns a malformed body."""

    def __init__(self, message: str, **kwargs: Any):
        super().__init__(message, category=ErrorCategory.SCHOLAR, **kwargs)


# Run Errors
class StageFailedError(AgentError):
    """Raised when a pipeline stage fails after its retries."""

    def __init__(self, stage: str, iteration: int, cause: Optional[BaseException] = None, **kwargs: Any):
        super().__init__(
            f"Iteration {iteration} failed at stage '{stage}': {cause}",
            category=cause.category if isinstance(cause, AgentError) else ErrorCategory.UNKNOWN,
            cause=cause,
            **kwargs,
        )
        self.stage = stage
        self.iteration = iteration


class RunIntegrityError(AgentError):
    """Raised when a run directory is corrupt or missing a claimed artifact."""

    def __init__(self, message: str, path: str, **kwargs: Any):
        super().__init__(f"{message}: {path}", category=ErrorCategory.PERSISTENCE, **kwargs)
        self.path = path


class RunLockedError(AgentError):
    """Raised when another writer holds the run directory."""

    def __init__(self, path: str, **kwargs: Any):
        super().__init__(f"Run directory is locked: {path}", category=ErrorCategory.PERSISTENCE, **kwargs)
        self.path = path


class BudgetExceededError(AgentError):
    """Raised when accumulated cost crosses the configured limit."""

    def __init__(self, total_cost: float, limit: float, **kwargs: Any):
        super().__init__(
            f"Run cost {total_cost:.4f} USD exceeds limit {limit:.4f} USD",
            category=ErrorCategory.BUDGET,
            **kwargs,
        )
        self.total_cost = total_cost
        self.limit = limit


# Evaluation Errors
class ScoreFormatError(AgentError):
    """Raised when a score CSV is malformed."""

    def __init__(self, message: str, row: Optional[int] = None, **kwargs: Any):
        if row is not None:
            message = f"{message} (row {row})"
        super().__init__(message, category=ErrorCategory.EVALUATION, **kwargs)
        self.row = row


class UnknownHypothesisError(AgentError):
    """Raised when a score card references a hypothesis absent from the run."""

    def __init__(self, hypothesis_id: str, **kwargs: Any):
        super().__init__(f"Unknown hypothesis id: {hypothesis_id}", category=ErrorCategory.EVALUATION, **kwargs)
        self.hypothesis_id = hypothesis_id
