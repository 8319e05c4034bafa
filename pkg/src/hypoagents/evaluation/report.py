"""Markdown run report and machine-readable counts."""

from __future__ import annotations

from typing import Any, Dict, List, Mapping, Optional, Sequence

from ..agents.models import Hypothesis
from ..orchestrator.models import RunRecord
from ..orchestrator.pipeline import collect_hypotheses
from ..specdata.grounding import ground_hypothesis
from ..specdata.models import PresenceMatrix
from .aggregate import AggregateReport, aggregate, count_classes
from .scores import CRITERIA, ScoreCard, classify, resolve_cards

_SHORT = {
    "novelty": "Nov",
    "consistency": "Con",
    "clarity": "Cla",
    "empirical": "Emp",
    "scope": "Sco",
    "predictive": "Pre",
}


def _cell(text: str) -> str:
    return " ".join(text.split()).replace("|", "\\|")


def sort_key(hypothesis: Hypothesis) -> tuple[int, int]:
    return hypothesis.iteration, hypothesis.ordinal


def report_counts(run: RunRecord, cards: Mapping[str, ScoreCard]) -> Dict[str, Any]:
    counts = count_classes(list(cards.values()))
    return {
        "run_id": run.run_id,
        "hypotheses": len(collect_hypotheses(run)),
        "scored": counts.total,
        **counts.to_dict(),
    }


def _aggregate_section(summary: Optional[AggregateReport]) -> List[str]:
    lines = ["## Aggregate scores", ""]
    if summary is None:
        return lines + ["No scores recorded.", ""]
    lines += ["| Criterion | Mean | Std |", "|---|---:|---:|"]
    for name, stat in summary.criteria.items():
        lines.append(f"| {name} | {stat.mean:.2f} | {stat.std:.2f} |")
    lines.append(f"| **overall** | **{summary.overall_mean:.2f}** | **{summary.overall_std:.2f}** |")
    return lines + [""]


def build_report(run: RunRecord, cards: Sequence[ScoreCard], matrix: PresenceMatrix) -> str:
    """Per-hypothesis table, aggregate scores, counts, iteration summary and cost."""
    hypotheses = sorted(collect_hypotheses(run), key=sort_key)
    by_key = resolve_cards(cards, hypotheses)
    summary = aggregate(list(by_key.values())) if by_key else None
    counts = report_counts(run, by_key)

    lines = [
        f"# Run report: {run.run_id}",
        "",
        f"- Status: {run.status.value}",
        f"- Iterations completed: {len(run.iterations)} of {run.config.iterations}",
        f"- Provider: {run.config.provider_id}",
        f"- Hypotheses: {counts['hypotheses']} total, {counts['scored']} scored",
        "",
        "## Hypotheses",
        "",
        "| Key | Statement | " + " | ".join(_SHORT[c] for c in CRITERIA) + " | Classification | Grounding |",
        "|---|---|" + "---:|" * len(CRITERIA) + "---|---|",
    ]
    for hypothesis in hypotheses:
        grounding = ground_hypothesis(hypothesis.key_datapoints, matrix).summary()
        card = by_key.get(hypothesis.key)
        if card is None:
            scores = ["-"] * len(CRITERIA)
            label = "unscored"
        else:
            scores = [str(value) for value in card.scores()]
            label = classify(card).label()
        lines.append(
            f"| {hypothesis.key} | {_cell(hypothesis.statement)} | " + " | ".join(scores)
            + f" | {label} | {grounding} |"
        )
    lines.append("")

    lines += _aggregate_section(summary)

    lines += [
        "## Counts",
        "",
        f"- Scored: {counts['total']}",
        f"- Plausible: {counts['plausible']} ({counts['plausible_fraction']:.0%})",
        f"- Novel and plausible: {counts['novel_and_plausible']} "
        f"({counts['novel_among_plausible_fraction']:.0%} of plausible)",
        "",
        "## Iterations",
        "",
        "| Iteration | Hypotheses | Rejected by critic |",
        "|---:|---:|---:|",
    ]
    for number, (produced, rejected) in enumerate(zip(run.hypothesis_counts(), run.rejection_counts()), start=1):
        lines.append(f"| {number} | {produced} | {rejected} |")
    lines.append("")

    lines += ["## Cost", "", f"- Total: {run.total_cost:.4f} USD", "", "| Role | USD |", "|---|---:|"]
    for role, cost in run.cost_by_role().items():
        lines.append(f"| {role} | {cost:.4f} |")
    lines += ["", "| Iteration | USD |", "|---:|---:|"]
    for iteration, cost in run.cost_by_iteration().items():
        lines.append(f"| {iteration} | {cost:.4f} |")
    lines.append("")
    return "\n".join(lines)
