"""Expert score ingest, classification, aggregation and reporting."""

from .aggregate import (
    AggregateReport,
    CriterionStat,
    ScoreCounts,
    aggregate,
    count_classes,
    format_aggregate,
    summarize_criterion_means,
)
from .report import build_report, report_counts
from .scores import CRITERIA, Classification, ScoreCard, classify, ingest_scores, parse_scores, resolve_cards

__all__ = [
    "CRITERIA",
    "AggregateReport",
    "Classification",
    "CriterionStat",
    "ScoreCard",
    "ScoreCounts",
    "aggregate",
    "build_report",
    "classify",
    "count_classes",
    "format_aggregate",
    "ingest_scores",
    "parse_scores",
    "report_counts",
    "resolve_cards",
    "summarize_criterion_means",
]
