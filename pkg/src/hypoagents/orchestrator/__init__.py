"""Run orchestration: iteration loop, persistence and resume."""

from .models import IterationRecord, LiteratureDigest, RunConfig, RunManifest, RunRecord, RunStatus
from .pipeline import Orchestrator, RunInputs, collect_hypotheses, prepare_inputs, resume, run
from .store import RunStore

__all__ = [
    "IterationRecord",
    "LiteratureDigest",
    "Orchestrator",
    "RunConfig",
    "RunInputs",
    "RunManifest",
    "RunRecord",
    "RunStatus",
    "RunStore",
    "collect_hypotheses",
    "prepare_inputs",
    "resume",
    "run",
]
