"""Per-criterion and overall aggregation of score cards."""

from __future__ import annotations

import statistics
from typing import Dict, List, Sequence, Tuple

from pydantic import BaseModel, ConfigDict

from ..errors import ScoreFormatError
from .scores import CRITERIA, ScoreCard, classify


class CriterionStat(BaseModel):
    model_config = ConfigDict(frozen=True)

    mean: float
    std: float


class ScoreCounts(BaseModel):
    model_config = ConfigDict(frozen=True)

    total: int
    plausible: int
    novel_and_plausible: int

    @property
    def plausible_fraction(self) -> float:
        return self.plausible / self.total if self.total else 0.0

    @property
    def novel_among_plausible_fraction(self) -> float:
        return self.novel_and_plausible / self.plausible if self.plausible else 0.0

    def to_dict(self) -> Dict[str, float]:
        return {
            "total": self.total,
            "plausible": self.plausible,
            "novel_and_plausible": self.novel_and_plausible,
            "plausible_fraction": self.plausible_fraction,
            "novel_among_plausible_fraction": self.novel_among_plausible_fraction,
        }


class AggregateReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    criteria: Dict[str, CriterionStat]
    overall_mean: float
    overall_std: float
    counts: ScoreCounts


def summarize_criterion_means(means: Sequence[float]) -> Tuple[float, float]:
    """Overall mean and population standard deviation over the criterion means."""
    return statistics.fmean(means), statistics.pstdev(means)


def count_classes(cards: Sequence[ScoreCard]) -> ScoreCounts:
    classes = [classify(card) for card in cards]
    return ScoreCounts(
        total=len(cards),
        plausible=sum(c.plausible for c in classes),
        novel_and_plausible=sum(c.plausible and c.novel for c in classes),
    )


def aggregate(cards: Sequence[ScoreCard]) -> AggregateReport:
    if not cards:
        raise ScoreFormatError("No score cards to aggregate")
    criteria: Dict[str, CriterionStat] = {}
    for position, name in enumerate(CRITERIA):
        values: List[int] = [card.scores()[position] for card in cards]
        criteria[name] = CriterionStat(mean=statistics.fmean(values), std=statistics.pstdev(values))
    overall_mean, overall_std = summarize_criterion_means([stat.mean for stat in criteria.values()])
    return AggregateReport(
        criteria=criteria,
        overall_mean=overall_mean,
        overall_std=overall_std,
        counts=count_classes(cards),
    )


def format_aggregate(report: AggregateReport) -> str:
    lines = [f"{'criterion':<12} {'mean':>6} {'std':>6}"]
    for name, stat in report.criteria.items():
        lines.append(f"{name:<12} {stat.mean:>6.2f} {stat.std:>6.2f}")
    lines.append(f"{'overall':<12} {report.overall_mean:>6.2f} {report.overall_std:>6.2f}")
    counts = report.counts
    lines.append(
        f"plausible {counts.plausible}/{counts.total}, novel and plausible {counts.novel_and_plausible}"
    )
    return "\n".join(lines)
