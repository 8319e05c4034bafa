"""
Test suite for agent-output parsing: JSON extraction, plans, hypotheses, critiques and ordinals.
"""

import json

import pytest

from src.hypoagents.agents.models import AgentRole, HypothesisSource, Verdict
from src.hypoagents.agents.ordinals import final_id, ordinal_word, word_index
from src.hypoagents.agents.parsing import (
    extract_json,
    load_json,
    parse_critic,
    parse_hypotheses,
    parse_planner_output,
    serialize_hypotheses,
)
from src.hypoagents.errors import OutputParseError
from tests.conftest import make_hypothesis

SCIENTIST = HypothesisSource(role=AgentRole.SCIENTIST, index=2)

ITEMS = [
    {"id": "H_one", "statement": "Dibenzothiophene marks parent-body synthesis.", "key_datapoints": "ID 14 in Orgueil"},
    {"id": "H_two", "statement": "A possible terpene is terrestrial.", "key_datapoints": "ID 4 in Atacama"},
]


class TestOrdinals:
    def test_words(self):
        assert ordinal_word(1) == "one"
        assert ordinal_word(13) == "thirteen"
        assert ordinal_word(20) == "twenty"
        assert ordinal_word(21) == "twenty_one"
        assert ordinal_word(99) == "ninety_nine"
        assert ordinal_word(100) == "100"

    def test_round_trip_to_ninety_nine(self):
        for n in range(1, 100):
            assert word_index(final_id(n)) == n
            assert word_index(f"H_{ordinal_word(n)}") == n

    def test_numeric_ordinals(self):
        assert word_index("H_final_120") == 120

    @pytest.mark.parametrize("bad", ["H_final_zero", "Hypothesis_one", "H_final_", "H_0", "H_twenty_ten"])
    def test_rejects_malformed_ids(self, bad):
        with pytest.raises(OutputParseError):
            word_index(bad)

    def test_ordinal_must_be_positive(self):
        with pytest.raises(ValueError):
            ordinal_word(0)


class TestExtractJson:
    def test_fenced_block(self):
        text = "Sure, here it is:\n```json\n{\"a\": [1, 2]}\n```\nThanks."
        assert json.loads(extract_json(text)) == {"a": [1, 2]}

    def test_prose_wrapped(self):
        text = 'My plan follows {"Agent1_instructions": "look at {braces} in text"} and that is all.'
        assert load_json(text) == {"Agent1_instructions": "look at {braces} in text"}

    def test_skips_unbalanced_prefix(self):
        assert load_json('Note [1 then {"ok": true}') == {"ok": True}

    def test_trailing_commas_repaired(self):
        assert load_json('{"hypothesis": [{"id": "H_one",},],}') == {"hypothesis": [{"id": "H_one"}]}

    def test_raw_newlines_in_strings(self):
        text = '{"Agent1_instructions": "Detailed instructions for\n    what Scientist 1 should do."}'
        assert "Scientist 1" in load_json(text)["Agent1_instructions"]

    def test_no_json(self):
        with pytest.raises(OutputParseError, match="No balanced JSON"):
            extract_json("I cannot help with that.")


class TestPlanner:
    def test_three_agents(self):
        text = json.dumps({f"Agent{k}_instructions": f"Task {k}" for k in range(1, 4)})
        plan = parse_planner_output(text)
        assert plan.instructions == ("Task 1", "Task 2", "Task 3")
        assert plan.for_agent(2) == "Task 2"
        assert plan.wire() == json.loads(text)

    def test_missing_key_is_named(self):
        text = json.dumps({"Agent1_instructions": "a", "Agent3_instructions": "c"})
        with pytest.raises(OutputParseError, match="missing key Agent2_instructions") as exc_info:
            parse_planner_output(text)
        assert exc_info.value.stage == "planner"

    def test_other_scientist_counts(self):
        text = json.dumps({f"Agent{k}_instructions": f"Task {k}" for k in range(1, 6)})
        assert len(parse_planner_output(text, scientist_count=5).instructions) == 5
        with pytest.raises(OutputParseError, match="Agent5_instructions"):
            parse_planner_output(json.dumps({f"Agent{k}_instructions": "a" for k in range(1, 5)}), scientist_count=5)

    def test_empty_instruction(self):
        text = json.dumps({"Agent1_instructions": "a", "Agent2_instructions": " ", "Agent3_instructions": "c"})
        with pytest.raises(OutputParseError, match="empty Agent2_instructions"):
            parse_planner_output(text)

    def test_array_is_rejected(self):
        with pytest.raises(OutputParseError, match="JSON object"):
            parse_planner_output("[1, 2, 3]")


class TestHypotheses:
    def test_bare_array(self):
        parsed = parse_hypotheses(json.dumps(ITEMS), SCIENTIST, iteration=3)
        assert [h.id for h in parsed] == ["H_one", "H_two"]
        assert parsed[0].source == SCIENTIST
        assert parsed[0].key == "3:H_one"

    def test_wrapped_object(self):
        for key in ("hypothesis", "hypotheses"):
            parsed = parse_hypotheses(json.dumps({key: ITEMS}), SCIENTIST, iteration=1)
            assert [h.statement for h in parsed] == [item["statement"] for item in ITEMS]

    def test_list_of_datapoints_is_joined(self):
        item = dict(ITEMS[0], key_datapoints=["ID 14 in Orgueil", "ID 13 in LEW 85311"])
        parsed = parse_hypotheses(json.dumps([item]), SCIENTIST, iteration=1)
        assert parsed[0].key_datapoints == "ID 14 in Orgueil; ID 13 in LEW 85311"

    def test_missing_field(self):
        item = {"id": "H_one", "statement": "x"}
        with pytest.raises(OutputParseError, match="element 0 missing key_datapoints"):
            parse_hypotheses(json.dumps([item]), SCIENTIST, iteration=1)

    def test_empty_field(self):
        item = dict(ITEMS[0], statement="  ")
        with pytest.raises(OutputParseError, match="element 0 has empty or non-text statement"):
            parse_hypotheses(json.dumps([item]), SCIENTIST, iteration=1)

    def test_bad_id(self):
        item = dict(ITEMS[0], id="Hypothesis A")
        with pytest.raises(OutputParseError, match="Unrecognized hypothesis id"):
            parse_hypotheses(json.dumps([item]), SCIENTIST, iteration=1)

    def test_wrong_shape(self):
        with pytest.raises(OutputParseError):
            parse_hypotheses('{"ideas": []}', SCIENTIST, iteration=1)

    def test_serialize_round_trip(self):
        parsed = parse_hypotheses(json.dumps(ITEMS), SCIENTIST, iteration=1)
        assert json.loads(serialize_hypotheses(parsed)) == {"hypothesis": ITEMS}
        assert json.loads(serialize_hypotheses(parsed, wrapped=False)) == ITEMS


class TestCritic:
    IDS = ["H_final_one", "H_final_two", "H_final_three"]

    def test_heading_sections(self):
        text = (
            "## Review\n\n"
            "**H_final_one**\nSolid, but compare with H_final_two before publishing.\n\n"
            "**H_final_two**\nReject: the data cannot separate sources.\n\n"
            "**H_final_three**\nA weakness is the small sample set.\n"
        )
        review = parse_critic(text, self.IDS)
        assert review.verdict_for("H_final_one") is Verdict.KEEP
        assert review.verdict_for("H_final_two") is Verdict.REJECT
        assert review.verdict_for("H_final_three") is Verdict.REVISE
        assert review.rejected() == ["H_final_two"]
        assert review.per_hypothesis["H_final_two"].excerpt.startswith("H_final_two** Reject")

    def test_latex_escaped_ids(self):
        text = "\\textbf{H\\_final\\_one}: fine.\n\\textbf{H\\_final\\_two}: flaw in the logic.\n"
        review = parse_critic(text, self.IDS[:2])
        assert review.verdict_for("H_final_one") is Verdict.KEEP
        assert review.verdict_for("H_final_two") is Verdict.REVISE

    def test_inline_mentions_without_headings(self):
        text = "Overall: H_final_one looks good, while H_final_two should be rejected outright."
        review = parse_critic(text, self.IDS[:2])
        assert review.verdict_for("H_final_one") is Verdict.KEEP
        assert review.verdict_for("H_final_two") is Verdict.REJECT

    def test_unmentioned_ids_are_kept(self):
        review = parse_critic("General remarks only.", self.IDS)
        assert all(review.verdict_for(hid) is Verdict.KEEP for hid in self.IDS)
        assert review.per_hypothesis["H_final_one"].excerpt == ""

    def test_id_prefixes_do_not_collide(self):
        ids = [final_id(n) for n in range(1, 22)]
        text = "**H_final_twenty_one**\nReject.\n\n**H_final_twenty**\nGood.\n"
        review = parse_critic(text, ids)
        assert review.verdict_for("H_final_twenty_one") is Verdict.REJECT
        assert review.verdict_for("H_final_twenty") is Verdict.KEEP

    def test_excerpt_is_bounded(self):
        text = "**H_final_one**\n" + "word " * 200
        assert len(parse_critic(text, ["H_final_one"]).per_hypothesis["H_final_one"].excerpt) == 200


def test_hypothesis_wire_shape():
    hypothesis = make_hypothesis()
    assert hypothesis.wire() == {
        "id": "H_one",
        "statement": hypothesis.statement,
        "key_datapoints": hypothesis.key_datapoints,
    }
    assert hypothesis.ordinal == 1
