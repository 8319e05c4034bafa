"""
Test suite for presence-table parsing, serialisation and pattern queries.
"""

import itertools
import random

import pytest

from src.hypoagents.errors import DocumentError, TableParseError, UnknownReferenceError
from src.hypoagents.specdata import (
    Compound,
    PresenceMatrix,
    Sample,
    SampleClass,
    co_occurring,
    exclusive_compounds,
    from_json,
    load_presence_table,
    parse_presence_table,
    samples_of,
    to_csv,
    to_json,
    to_latex,
)
from tests.conftest import DEMO_DIR

MINIMAL_CSV = "id,name,mw,Orgueil,Atacama\nclass,,,Meteorite,Soil\n14,Dibenzothiophene,184.26,x,\n43,Biphenyl,154.21,,1\n"


class TestParsing:
    """Test the LaTeX and CSV readers."""

    def test_demo_table_shape(self, matrix):
        assert len(matrix) == 21
        assert len(matrix.sample_names(SampleClass.METEORITE)) == 7
        assert len(matrix.sample_names(SampleClass.SOIL)) == 8
        assert matrix.sample("Orgueil").subtype == "CI1"
        assert matrix.sample("Atacama").subtype is None
        assert matrix.compound(14).name == "Dibenzothiophene"
        assert matrix.compound(14).molecular_weight == pytest.approx(184.26)
        assert matrix.compound(4).molecular_weight is None

    @pytest.mark.parametrize("compound_id, name", [
        (12, "Fluoranthene"),
        (13, "Pyrene"),
        (27, "1,2,4-Trithiolane"),
        (28, "Ergost-14-ene"),
        (36, "1,2,3,4-Tetrahydrophenanthrene"),
        (43, "Biphenyl"),
    ])
    def test_demo_compound_names(self, matrix, compound_id, name):
        assert matrix.compound(compound_id).name == name

    @pytest.mark.parametrize("compound_id, alt_names", [
        (42, ("Phenanthrene", "Anthracene")),
        (44, ("1H-Phenalen-1-one", "9H-Fluoren-9-one")),
    ])
    def test_demo_slash_names(self, matrix, compound_id, alt_names):
        assert matrix.compound(compound_id).alt_names == alt_names

    def test_latex_and_csv_sources_agree(self, matrix):
        from_csv, _ = load_presence_table(DEMO_DIR / "data" / "presence_table.csv")
        assert from_csv == matrix

    def test_markers(self):
        text = (
            "id,name,A,B,C,D\n"
            "class,,Meteorite,Meteorite,Soil,Soil\n"
            "1,Naphthalene,x,X,1,✓\n"
            "2,Pyrene,-,0,,x (tentative)\n"
        )
        parsed = parse_presence_table(text)
        assert parsed.present_in(1) == {"A", "B", "C", "D"}
        assert parsed.present_in(2) == {"D"}

    def test_latex_checkmark_and_escapes(self):
        text = (
            "\\begin{tabular}{llcc}\n\\toprule\n"
            "ID & Name & Orgueil & GSFC soil \\\\\n"
            "class & & Meteorite & Soil \\\\\n\\midrule\n"
            "7 & Fluorene \\& co & $\\checkmark$ & - \\\\\n"
            "\\bottomrule\n\\end{tabular}\n"
        )
        parsed = parse_presence_table(text)
        assert parsed.compound(7).name == "Fluorene & co"
        assert parsed.is_present(7, "Orgueil")
        assert not parsed.is_present(7, "GSFC soil")

    def test_latex_markers_with_sample_notes(self):
        text = (
            "\\begin{tabular}{lllccc}\n\\toprule\n"
            "ID & Name & MW & Orgueil & ALH 83100 & LEW 85311 \\\\\n"
            "class & & & Meteorite & Meteorite & Meteorite \\\\\n\\midrule\n"
            "14 & Dibenzothiophene & 184.26 & x (Orgueil) & x (ALH 83100) & x (LEW 85311) \\\\\n"
            "\\bottomrule\n\\end{tabular}\n"
        )
        parsed = parse_presence_table(text)
        assert parsed.presence == {(14, "Orgueil"), (14, "ALH 83100"), (14, "LEW 85311")}

    def test_class_mapping_without_class_row(self):
        text = "id,name,Orgueil,Atacama\n14,Dibenzothiophene,x,\n"
        parsed = parse_presence_table(text, {"Orgueil": "Meteorite:CI1", "Atacama": "soil"})
        assert parsed.sample("Orgueil").sample_class is SampleClass.METEORITE
        assert parsed.sample("Orgueil").subtype == "CI1"
        assert parsed.sample("Atacama").sample_class is SampleClass.SOIL

    def test_slash_names_become_alternatives(self):
        text = "id,name,Orgueil\nclass,,Meteorite\n5,Acenaphthene/Acenaphthylene,x\n"
        compound = parse_presence_table(text).compound(5)
        assert compound.alt_names == ("Acenaphthene", "Acenaphthylene")

    def test_bad_marker_names_row_and_column(self):
        text = "id,name,Orgueil\nclass,,Meteorite\n14,Dibenzothiophene,maybe\n"
        with pytest.raises(TableParseError) as exc_info:
            parse_presence_table(text)
        assert exc_info.value.row == 3
        assert exc_info.value.column == "Orgueil"

    def test_missing_class_is_unknown_column(self):
        with pytest.raises(TableParseError, match="Unknown column") as exc_info:
            parse_presence_table("id,name,Orgueil,Nowhere\nclass,,Meteorite,\n14,Dibenzothiophene,x,\n")
        assert exc_info.value.column == "Nowhere"

    def test_unknown_class_value(self):
        with pytest.raises(TableParseError, match="Unknown column"):
            parse_presence_table("id,name,Orgueil\nclass,,Comet\n14,Dibenzothiophene,x\n")

    def test_duplicate_compound_id(self):
        with pytest.raises(TableParseError, match="Duplicate compound id 14"):
            parse_presence_table(MINIMAL_CSV + "14,Dibenzothiophene again,184.26,x,\n")

    def test_ragged_row(self):
        with pytest.raises(TableParseError) as exc_info:
            parse_presence_table("id,name,Orgueil\nclass,,Meteorite\n14,Dibenzothiophene\n")
        assert exc_info.value.row == 3

    def test_non_positive_molecular_weight(self):
        with pytest.raises(TableParseError):
            parse_presence_table("id,name,mw,Orgueil\nclass,,,Meteorite\n14,Dibenzothiophene,-3,x\n")

    def test_header_must_start_with_id_and_name(self):
        with pytest.raises(TableParseError, match="Header"):
            parse_presence_table("compound,Orgueil\nclass,Meteorite\n")

    def test_missing_file_is_document_error(self, tmp_path):
        with pytest.raises(DocumentError):
            load_presence_table(tmp_path / "absent.tex")


class TestSerialisation:
    """Every written form re-parses to an equal matrix."""

    def test_csv(self, matrix):
        assert parse_presence_table(to_csv(matrix)) == matrix

    def test_latex(self, matrix):
        assert parse_presence_table(to_latex(matrix)) == matrix

    def test_json(self, matrix):
        assert from_json(to_json(matrix)) == matrix

    def test_json_is_canonical(self, matrix):
        assert to_json(from_json(to_json(matrix))) == to_json(matrix)
        assert to_json(matrix).endswith("\n")


class TestQueries:
    """Test deterministic pattern queries on the demo matrix."""

    def test_samples_of(self, matrix):
        assert samples_of(matrix, 27) == {"Aguas Zarcas", "LEW 85311"}

    def test_samples_of_soil_biomarker(self, matrix):
        assert samples_of(matrix, 28) == {"Lignite Soil", "Murchison Soil"}

    def test_samples_of_unknown_id(self, matrix):
        with pytest.raises(UnknownReferenceError):
            samples_of(matrix, 99)

    def test_exclusive_compounds(self, matrix):
        assert exclusive_compounds(matrix, SampleClass.SOIL) == {4, 5, 10, 17, 18, 28}
        assert exclusive_compounds(matrix, SampleClass.METEORITE) == {
            2, 8, 11, 12, 13, 14, 15, 27, 33, 36, 42, 43, 44, 45,
        }

    def test_co_occurring(self, matrix):
        assert co_occurring(matrix, [42, 43, 44, 45]) == {"Orgueil", "LEW 85311"}
        assert co_occurring(matrix, [4, 28]) == set()
        assert co_occurring(matrix, []) == set(matrix.sample_names())

    def test_four_ring_pahs_share_two_meteorites(self, matrix):
        assert co_occurring(matrix, {12, 13}) == {"LON 94101", "LEW 85311"}

    @pytest.mark.parametrize("compound_id", [2, 13, 14, 27, 28, 42])
    def test_single_compound_co_occurrence_is_its_samples(self, matrix, compound_id):
        assert co_occurring(matrix, [compound_id]) == samples_of(matrix, compound_id)

    @pytest.mark.parametrize("sample_class, expected_subset", [
        (SampleClass.SOIL, {4, 17, 18, 28}),
        (SampleClass.METEORITE, {12, 13, 14, 27}),
    ])
    def test_exclusive_sets_contain_known_compounds(self, matrix, sample_class, expected_subset):
        assert expected_subset <= exclusive_compounds(matrix, sample_class)

    def test_exclusive_sets_are_disjoint(self, matrix):
        soil = exclusive_compounds(matrix, SampleClass.SOIL)
        meteorite = exclusive_compounds(matrix, SampleClass.METEORITE)
        assert soil.isdisjoint(meteorite)

    def test_co_occurring_shrinks_as_compounds_are_added(self, matrix):
        ids = [c.id for c in matrix.compounds]
        for smaller, extra in itertools.product(itertools.combinations(ids, 2), ids):
            assert co_occurring(matrix, [*smaller, extra]) <= co_occurring(matrix, smaller)


def _random_matrix(rng, n_compounds, n_samples):
    compounds = [Compound(id=i, name=f"Compound {i}") for i in range(1, n_compounds + 1)]
    samples = [
        Sample(name=f"S{j}", sample_class=rng.choice(list(SampleClass))) for j in range(1, n_samples + 1)
    ]
    presence = {(c.id, s.name) for c in compounds for s in samples if rng.random() < 0.5}
    return PresenceMatrix.build(compounds, samples, presence)


def test_queries_agree_with_brute_force():
    rng = random.Random(1234)
    for n_compounds, n_samples in itertools.product(range(1, 7), range(1, 5)):
        for _ in range(10):
            m = _random_matrix(rng, n_compounds, n_samples)
            for sample_class in SampleClass:
                expected = {
                    c.id for c in m.compounds
                    if any(m.is_present(c.id, s.name) for s in m.samples)
                    and all(s.sample_class is sample_class for s in m.samples if m.is_present(c.id, s.name))
                }
                assert exclusive_compounds(m, sample_class) == expected
            ids = [c.id for c in m.compounds]
            for size in range(0, min(3, len(ids)) + 1):
                for subset in itertools.combinations(ids, size):
                    expected_samples = {
                        s.name for s in m.samples if all(m.is_present(cid, s.name) for cid in subset)
                    }
                    assert co_occurring(m, subset) == expected_samples
