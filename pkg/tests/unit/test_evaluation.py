"""
Test suite for expert score ingest, classification and aggregation.
"""

import random
import statistics

import pytest

from src.hypoagents.errors import ScoreFormatError, UnknownHypothesisError
from src.hypoagents.evaluation import (
    CRITERIA,
    ScoreCard,
    aggregate,
    classify,
    count_classes,
    format_aggregate,
    ingest_scores,
    parse_scores,
    resolve_cards,
    summarize_criterion_means,
)
from tests.conftest import make_hypothesis

HEADER = "hypothesis_id,novelty,consistency,clarity,empirical,scope,predictive\n"


def card(hypothesis_id="H_final_one", *scores):
    return ScoreCard(hypothesis_id=hypothesis_id, **dict(zip(CRITERIA, scores)))


class TestIngest:
    def test_valid_row(self):
        cards = parse_scores(HEADER + "H_final_one,7,9,9,9,9,8\n")
        assert cards == [card("H_final_one", 7, 9, 9, 9, 9, 8)]

    def test_header_only_is_empty(self):
        assert parse_scores(HEADER) == []

    def test_blank_file(self):
        with pytest.raises(ScoreFormatError, match="empty"):
            parse_scores("\n\n")

    def test_out_of_range_names_row(self):
        with pytest.raises(ScoreFormatError, match="outside 0..10") as exc_info:
            parse_scores(HEADER + "H_final_one,7,9,9,9,9,8\nH_final_two,11,9,9,9,9,8\n")
        assert exc_info.value.row == 3

    @pytest.mark.parametrize("value", ["7.5", "seven", ""])
    def test_non_integer(self, value):
        with pytest.raises(ScoreFormatError, match="not an integer"):
            parse_scores(HEADER + f"H_final_one,{value},9,9,9,9,8\n")

    def test_duplicate_id(self):
        with pytest.raises(ScoreFormatError, match="Duplicate hypothesis_id H_final_one"):
            parse_scores(HEADER + "H_final_one,7,9,9,9,9,8\nH_final_one,3,9,9,9,9,8\n")

    def test_wrong_header(self):
        with pytest.raises(ScoreFormatError, match="Expected header"):
            parse_scores("id,novelty\nH_final_one,7\n")

    def test_short_row(self):
        with pytest.raises(ScoreFormatError, match="Expected 7 columns") as exc_info:
            parse_scores(HEADER + "H_final_one,7,9\n")
        assert exc_info.value.row == 2

    def test_file_with_bom(self, tmp_path):
        path = tmp_path / "scores.csv"
        path.write_text("\ufeff" + HEADER + "1:H_final_one,5,8,8,8,8,8\n", encoding="utf-8")
        assert ingest_scores(path)[0].hypothesis_id == "1:H_final_one"

    def test_missing_file(self, tmp_path):
        with pytest.raises(ScoreFormatError, match="unreadable"):
            ingest_scores(tmp_path / "absent.csv")


class TestClassify:
    def test_novel_and_plausible(self):
        result = classify(card("H_final_one", 7, 9, 9, 9, 9, 8))
        assert result.novel and result.plausible
        assert result.other_mean == pytest.approx(8.8)
        assert result.label() == "novel, plausible"

    def test_plausible_not_novel(self):
        result = classify(card("H_final_five", 3, 10, 10, 10, 10, 10))
        assert result.plausible and not result.novel

    def test_boundaries_are_inclusive(self):
        result = classify(card("H_final_one", 5, 8, 8, 8, 8, 8))
        assert result.novel and result.plausible
        result = classify(card("H_final_one", 4, 8, 8, 8, 8, 7))
        assert not result.novel and not result.plausible
        assert result.label() == "not novel, not plausible"

    def test_monotonic(self):
        rng = random.Random(99)
        for _ in range(500):
            scores = [rng.randint(0, 10) for _ in CRITERIA]
            before = classify(card("H_one", *scores))
            position = rng.randrange(len(CRITERIA))
            if scores[position] == 10:
                continue
            raised = list(scores)
            raised[position] += 1
            after = classify(card("H_one", *raised))
            assert not (before.plausible and not after.plausible)
            assert not (before.novel and not after.novel)


class TestAggregate:
    def test_reference_criterion_means(self):
        mean, std = summarize_criterion_means([2.75, 7.60, 7.20, 6.75, 7.60, 7.60])
        assert mean == pytest.approx(6.58, abs=0.01)
        assert std == pytest.approx(1.74, abs=0.01)
        mean, std = summarize_criterion_means([4.26, 6.19, 5.92, 5.79, 6.01, 5.86])
        assert mean == pytest.approx(5.67, abs=0.01)
        assert std == pytest.approx(0.64, abs=0.01)

    def test_identical_cards(self):
        report = aggregate([card(f"H_{n}", 6, 6, 6, 6, 6, 6) for n in ("one", "two", "three")])
        assert all(stat.mean == 6 and stat.std == 0 for stat in report.criteria.values())
        assert report.overall_mean == 6
        assert report.overall_std == 0

    def test_overall_is_recomputable(self):
        rng = random.Random(5)
        cards = [card("H_one", *(rng.randint(0, 10) for _ in CRITERIA)) for _ in range(7)]
        report = aggregate(cards)
        means = [stat.mean for stat in report.criteria.values()]
        assert report.overall_mean == statistics.fmean(means)
        assert list(report.criteria) == list(CRITERIA)

    def test_population_std_against_two_pass(self):
        rng = random.Random(11)
        for size in range(1, 8):
            cards = [card("H_one", *(rng.randint(0, 10) for _ in CRITERIA)) for _ in range(size)]
            report = aggregate(cards)
            for position, name in enumerate(CRITERIA):
                values = [c.scores()[position] for c in cards]
                mean = sum(values) / len(values)
                expected = (sum((v - mean) ** 2 for v in values) / len(values)) ** 0.5
                assert report.criteria[name].std == pytest.approx(expected)

    def test_empty_input(self):
        with pytest.raises(ScoreFormatError):
            aggregate([])

    def test_counts(self):
        cards = (
            [card("H_one", 7, 9, 9, 9, 9, 8)] * 24
            + [card("H_one", 3, 10, 10, 10, 10, 10)] * 12
            + [card("H_one", 6, 5, 5, 5, 5, 5)] * 12
        )
        counts = count_classes(cards)
        assert (counts.total, counts.plausible, counts.novel_and_plausible) == (48, 36, 24)
        assert counts.plausible_fraction == 0.75
        assert counts.novel_among_plausible_fraction == pytest.approx(2 / 3)

    def test_format(self):
        text = format_aggregate(aggregate([card("H_one", 7, 9, 9, 9, 9, 8)]))
        assert text.splitlines()[0].split() == ["criterion", "mean", "std"]
        assert "overall" in text
        assert text.endswith("plausible 1/1, novel and plausible 1")


class TestResolveCards:
    HYPOTHESES = [
        make_hypothesis("H_final_one", iteration=1),
        make_hypothesis("H_final_two", iteration=1),
        make_hypothesis("H_final_one", iteration=2),
    ]

    def test_keys_and_unique_bare_ids(self):
        cards = [card("2:H_final_one", *[5] * 6), card("H_final_two", *[6] * 6)]
        resolved = resolve_cards(cards, self.HYPOTHESES)
        assert set(resolved) == {"2:H_final_one", "1:H_final_two"}

    def test_ambiguous_bare_id(self):
        with pytest.raises(ScoreFormatError, match="ambiguous"):
            resolve_cards([card("H_final_one", *[5] * 6)], self.HYPOTHESES)

    def test_unknown_id(self):
        with pytest.raises(UnknownHypothesisError):
            resolve_cards([card("H_final_three", *[5] * 6)], self.HYPOTHESES)

    def test_scored_twice(self):
        cards = [card("1:H_final_two", *[5] * 6), card("H_final_two", *[6] * 6)]
        with pytest.raises(ScoreFormatError, match="scored twice"):
            resolve_cards(cards, self.HYPOTHESES)
