"""
Test suite for claim extraction and grounding verification against the demo matrix.
"""

import json

import pytest

from src.hypoagents.specdata import (
    Assertion,
    ClaimRefs,
    Polarity,
    extract_claim_refs,
    ground_hypothesis,
    verify_grounding,
)
from tests.conftest import demo_script_entries


def present(compound, sample):
    return Assertion(compound, sample, Polarity.PRESENT)


def absent(compound, sample):
    return Assertion(compound, sample, Polarity.ABSENT)


class TestVerifyGrounding:
    def test_reference_assertions(self, matrix):
        refs = ClaimRefs.from_assertions([
            present(14, "Orgueil"),
            present(27, "Aguas Zarcas"),
            absent(4, "Murchison"),
            present(13, "ALH 83100"),
        ])
        report = verify_grounding(matrix, refs)
        assert report.supported == (present(14, "Orgueil"), present(27, "Aguas Zarcas"), absent(4, "Murchison"))
        assert report.violated == (present(13, "ALH 83100"),)
        assert not report.grounded
        assert report.summary() == "3 supported / 1 violated / 0 unresolved"

    def test_unknown_references_are_unresolved(self, matrix):
        refs = ClaimRefs.from_assertions([present(99, "Orgueil"), present(14, "Mars")])
        report = verify_grounding(matrix, refs)
        assert report.supported == ()
        assert report.violated == ()
        assert set(report.unresolved) == {"ID 99", "Mars"}

    def test_names_resolve_case_insensitively(self, matrix):
        refs = ClaimRefs.from_assertions([present("acenaphthene", "lew 85311")])
        assert verify_grounding(matrix, refs).supported == (present("acenaphthene", "lew 85311"),)


class TestExtractClaimRefs:
    def test_presence_and_negation(self, matrix):
        refs = extract_claim_refs("Dibenzothiophene (ID 14) found in Orgueil and LEW 85311 but absent in Murchison", matrix)
        assert set(refs.assertions) == {
            present(14, "Orgueil"),
            present(14, "LEW 85311"),
            absent(14, "Murchison"),
        }
        assert refs.compound_ids == {14}

    def test_longest_sample_name_wins(self, matrix):
        refs = extract_claim_refs("ID 28 found in Murchison Soil", matrix)
        assert refs.assertions == (present(28, "Murchison Soil"),)

    def test_id_lists(self, matrix):
        refs = extract_claim_refs("IDs 42, 43, 44 and 45 found in Orgueil", matrix)
        assert refs.compound_ids == {42, 43, 44, 45}
        assert len(refs.assertions) == 4

    def test_only_expands_to_remaining_samples(self, matrix):
        report = ground_hypothesis("IDs 42, 43 found only in Orgueil and LEW 85311", matrix)
        assert report.grounded
        # 2 present + 13 absent per compound
        assert len(report.supported) == 30

    def test_only_with_class_negates_the_other_class(self, matrix):
        refs = extract_claim_refs("ID 33 found only in meteorite samples", matrix)
        assert set(refs.assertions) == {absent(33, name) for name in matrix.sample_names() if "oil" in name
                                        or name == "Atacama"}
        assert ground_hypothesis("ID 33 found only in meteorite samples", matrix).grounded

    def test_hedged_class_phrases_produce_nothing(self, matrix):
        refs = extract_claim_refs("ID 4 found in most soil samples", matrix)
        assert refs.assertions == ()

    def test_compound_names_without_ids(self, matrix):
        refs = extract_claim_refs("Acenaphthene found in ALH 83100 and LEW 85311", matrix)
        assert set(refs.assertions) == {present("Acenaphthene", "ALH 83100"), present("Acenaphthene", "LEW 85311")}
        assert ground_hypothesis("Acenaphthene found in ALH 83100 and LEW 85311", matrix).grounded

    @pytest.mark.parametrize("text", [
        "dibenzothiophene found in Orgueil, ALH 83100, LEW 85311",
        "fluoranthene found in ALH 83100, LON 94101, LEW 85311",
        "pyrene found in Orgueil, LON 94101, LEW 85311",
        "1,2,4-Trithiolane found in Aguas Zarcas and LEW 85311",
        "Ergost-14-ene found only in Lignite Soil and Murchison Soil",
    ])
    def test_published_compound_names_ground(self, matrix, text):
        report = ground_hypothesis(text, matrix)
        assert report.grounded
        assert report.supported
        assert report.unresolved == ()

    @pytest.mark.parametrize("text, compound_id", [
        ("Phenanthrene found in Orgueil and LEW 85311", 42),
        ("Anthracene found in Orgueil and LEW 85311", 42),
        ("9H-Fluoren-9-one found in Orgueil and LEW 85311", 44),
        ("1H-Phenalen-1-one found in Orgueil and LEW 85311", 44),
    ])
    def test_slash_name_parts_resolve(self, matrix, text, compound_id):
        refs = extract_claim_refs(text, matrix)
        report = verify_grounding(matrix, refs)
        assert report.grounded
        assert len(report.supported) == 2
        assert all(matrix.is_present(compound_id, a.sample) for a in report.supported)

    def test_hyphenated_names_do_not_match_parents(self, matrix):
        refs = extract_claim_refs("2-Methylnaphthalene found in Murchison", matrix)
        assert refs.assertions == (present("2-Methylnaphthalene", "Murchison"),)

    def test_unknown_soil_is_unresolved(self, matrix):
        report = ground_hypothesis("ID 4 found in Nevada Soil", matrix)
        assert "Nevada Soil" in report.unresolved
        assert report.violated == ()

    def test_violation_is_reported(self, matrix):
        report = ground_hypothesis("Pyrene (ID 13) found in ALH 83100", matrix)
        assert report.violated == (present(13, "ALH 83100"),)

    def test_datapoint_naming_the_wrong_samples_is_flagged(self, matrix):
        report = ground_hypothesis("Biphenyl (ID 43) found in Green River Shale soil and Lignite Soil", matrix)
        assert set(report.violated) == {present(43, "Green River Shale soil"), present(43, "Lignite Soil")}
        assert not report.grounded

    def test_class_negation_counts(self, matrix):
        refs = extract_claim_refs(
            "IDs 2, 8, 15 found in meteorites (Orgueil, ALH 83100, LON 94101, Murchison, Jbilet Winselwan, "
            "LEW 85311) but absent in all soil samples",
            matrix,
        )
        polarities = [a.polarity for a in refs.assertions]
        assert polarities.count(Polarity.PRESENT) == 18
        assert polarities.count(Polarity.ABSENT) == 24

    def test_only_counts(self, matrix):
        refs = extract_claim_refs("ID 28 found only in Lignite Soil and Murchison Soil", matrix)
        polarities = [a.polarity for a in refs.assertions]
        assert polarities.count(Polarity.PRESENT) == 2
        assert polarities.count(Polarity.ABSENT) == 13
        assert ground_hypothesis("ID 28 found only in Lignite Soil and Murchison Soil", matrix).grounded

    @pytest.mark.parametrize("text", [
        "ID 14 (dibenzothiophene) in Orgueil/ALH 83100/LEW 85311, ID 27 (1,2,4-trithiolane) in Aguas Zarcas/LEW 85311",
        "ID 12 in ALH 83100, LON 94101, LEW 85311, ID 13 in Orgueil, LON 94101, LEW 85311",
        "Fluoranthene in ALH 83100 and LON 94101, pyrene in Orgueil and LEW 85311",
        "ID 2 (2-methylnaphthalene), ID 8 (1-methylnaphthalene) found in Orgueil, ALH 83100 and Murchison",
    ])
    def test_several_claims_in_one_clause(self, matrix, text):
        report = ground_hypothesis(text, matrix)
        assert report.violated == ()
        assert report.grounded

    def test_claims_in_one_clause_keep_their_own_samples(self, matrix):
        refs = extract_claim_refs(
            "ID 14 (dibenzothiophene) in Orgueil/ALH 83100/LEW 85311, ID 27 (1,2,4-trithiolane) in Aguas Zarcas/LEW 85311",
            matrix,
        )
        assert set(refs.assertions) == {
            present(14, "Orgueil"),
            present(14, "ALH 83100"),
            present(14, "LEW 85311"),
            present(27, "Aguas Zarcas"),
            present(27, "LEW 85311"),
        }

    def test_mixed_claims_still_report_the_wrong_pair(self, matrix):
        report = ground_hypothesis("ID 12 in ALH 83100, LON 94101, ID 13 in ALH 83100", matrix)
        assert report.violated == (present(13, "ALH 83100"),)

    @pytest.mark.parametrize("text", [
        "IDs 2, 8, 15 found in meteorites (Orgueil, ALH 83100, LON 94101, Murchison, Jbilet Winselwan, "
        "LEW 85311) but absent in all soil samples",
        "ID 28 found only in Lignite Soil and Murchison Soil",
        "ID 99 found in Orgueil and Mars; Pyrene (ID 13) found in ALH 83100",
        "ID 12 in ALH 83100, Orgueil, ID 13 in Orgueil, Murchison",
    ])
    def test_every_resolvable_assertion_is_classified(self, matrix, text):
        refs = extract_claim_refs(text, matrix)
        resolvable = [
            a for a in refs.assertions
            if isinstance(a.compound, int) and matrix.has_compound(a.compound) and matrix.has_sample(a.sample)
        ]
        report = verify_grounding(matrix, refs)
        assert len(report.supported) + len(report.violated) == len(resolvable)

    def test_empty_text(self, matrix):
        assert extract_claim_refs("   ", matrix).is_empty()

    def test_demo_hypotheses_are_grounded(self, matrix):
        accumulator = next(e for e in demo_script_entries() if e["role"] == "Accumulator")
        for item in json.loads(accumulator["text"])["hypothesis"]:
            report = ground_hypothesis(item["key_datapoints"], matrix)
            assert report.grounded, item["id"]
            assert report.supported
