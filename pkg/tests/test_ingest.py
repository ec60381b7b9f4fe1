import numpy as np
import pytest

from amrbench.errors import IntegrityError, ParseError, SchemaError
from amrbench.ingest import (
    SensitivityLabel,
    apply_cohort_filter,
    binarize_label,
    load_tables,
    serialize_cohort,
)

from conftest import load_fixture, micro_row, stay_row, write_tables


def test_identity_load(tmp_path):
    cohort = load_fixture(
        tmp_path,
        [stay_row(), stay_row(patient_unit_stay_id="S2", patient_id="P2")],
        [
            micro_row(),
            micro_row(test_id="T2", sensitivity="Resistant"),
            micro_row(test_id="T3", patient_unit_stay_id="S2", sensitivity="Intermediate"),
        ],
    )
    assert len(cohort.stays) == 2
    assert len(cohort.tests) == 3
    assert [t.test_id for t in cohort.tests] == ["T1", "T2", "T3"]


def test_dangling_foreign_key_is_integrity_error(tmp_path):
    with pytest.raises(IntegrityError, match="S9"):
        load_fixture(tmp_path, [stay_row()], [micro_row(patient_unit_stay_id="S9")])


def test_unknown_sensitivity_is_parse_error(tmp_path):
    with pytest.raises(ParseError, match="Susceptible"):
        load_fixture(tmp_path, [stay_row()], [micro_row(sensitivity="Susceptible")])


def test_missing_required_column_names_it(tmp_path):
    stays_path, micro_path = write_tables(tmp_path, [stay_row()], [micro_row()])
    text = stays_path.read_text().replace("unit_admit_year", "admit_year")
    stays_path.write_text(text)
    with pytest.raises(SchemaError, match="unit_admit_year"):
        load_tables(stays_path, micro_path)


def test_missing_sensitivity_rows_are_dropped(tmp_path, caplog):
    cohort = load_fixture(
        tmp_path,
        [stay_row()],
        [micro_row(), micro_row(test_id="T2", sensitivity="")],
    )
    assert len(cohort.tests) == 1


def test_duplicate_stay_id_rejected(tmp_path):
    with pytest.raises(IntegrityError, match="duplicate"):
        load_fixture(tmp_path, [stay_row(), stay_row()], [micro_row()])


def test_age_over_89_parses_as_90(tmp_path):
    cohort = load_fixture(tmp_path, [stay_row(age=">89")], [micro_row()])
    assert cohort.stays[0].age == 90


def test_unparseable_age_names_row(tmp_path):
    with pytest.raises(ParseError, match="row 0"):
        load_fixture(tmp_path, [stay_row(age="old")], [micro_row()])


def test_binarize_label():
    assert binarize_label(SensitivityLabel.RESISTANT) == 1
    assert binarize_label(SensitivityLabel.INTERMEDIATE) == 0
    assert binarize_label(SensitivityLabel.SENSITIVE) == 0


def test_filter_drops_minors_and_their_stays(tmp_path):
    cohort = load_fixture(
        tmp_path,
        [stay_row(age="15"), stay_row(patient_unit_stay_id="S2", patient_id="P2", age="16")],
        [micro_row(), micro_row(test_id="T2", patient_unit_stay_id="S2")],
    )
    filtered = apply_cohort_filter(cohort)
    assert [s.patient_unit_stay_id for s in filtered.stays] == ["S2"]
    assert [t.test_id for t in filtered.tests] == ["T2"]


def test_filter_drops_off_list_organism(tmp_path):
    cohort = load_fixture(
        tmp_path,
        [stay_row()],
        [micro_row(), micro_row(test_id="T2", organism="Proteus mirabilis")],
    )
    filtered = apply_cohort_filter(cohort)
    assert [t.test_id for t in filtered.tests] == ["T1"]


def test_filter_matches_case_insensitively_and_canonicalizes(tmp_path):
    cohort = load_fixture(
        tmp_path,
        [stay_row()],
        [micro_row(organism=" escherichia COLI ", antibiotic="AMPICILLIN")],
    )
    filtered = apply_cohort_filter(cohort)
    assert filtered.tests[0].organism == "Escherichia coli"
    assert filtered.tests[0].antibiotic == "ampicillin"


def test_filter_is_idempotent(tmp_path):
    cohort = load_fixture(
        tmp_path,
        [stay_row(), stay_row(patient_unit_stay_id="S2", patient_id="P2", age="14")],
        [
            micro_row(),
            micro_row(test_id="T2", organism="Candida albicans"),
            micro_row(test_id="T3", patient_unit_stay_id="S2"),
        ],
    )
    once = apply_cohort_filter(cohort)
    twice = apply_cohort_filter(once)
    assert [t.test_id for t in once.tests] == [t.test_id for t in twice.tests]
    assert [s.patient_unit_stay_id for s in once.stays] == [
        s.patient_unit_stay_id for s in twice.stays
    ]


def test_min_culture_offset_flag(tmp_path):
    cohort = load_fixture(
        tmp_path,
        [stay_row()],
        [micro_row(culture_taken_offset_min="-30"), micro_row(test_id="T2", culture_taken_offset_min="0")],
    )
    default = apply_cohort_filter(cohort)
    assert len(default.tests) == 2  # default keeps pre-admission cultures
    strict = apply_cohort_filter(cohort, min_culture_offset_min=0.0)
    assert [t.test_id for t in strict.tests] == ["T2"]


def test_resistant_fraction_on_paper_proportioned_fixture(tmp_path):
    # 2285 resistant / 5510 sensitive / 218 intermediate, scaled from the
    # study's 22852/55095/2178 counts; overall rate must match 0.285 +- 0.001.
    counts = {"Resistant": 2285, "Sensitive": 5510, "Intermediate": 218}
    micros = []
    i = 0
    for label, n in counts.items():
        for _ in range(n):
            micros.append(micro_row(test_id=f"T{i}", sensitivity=label))
            i += 1
    cohort = load_fixture(tmp_path, [stay_row()], micros)
    filtered = apply_cohort_filter(cohort)
    rate = np.mean([binarize_label(t.sensitivity) for t in filtered.tests])
    assert rate == pytest.approx(0.285, abs=1e-3)


def test_round_trip_preserves_accepted_rows(tmp_path):
    stays = [stay_row(), stay_row(patient_unit_stay_id="S2", patient_id="P2", height_cm="")]
    micros = [micro_row(), micro_row(test_id="T2", patient_unit_stay_id="S2", culture_taken_offset_min="-45")]
    stays_path, micro_path = write_tables(tmp_path, stays, micros)
    cohort = load_tables(stays_path, micro_path)
    out_stays = tmp_path / "stays_out.csv"
    out_micro = tmp_path / "micro_out.csv"
    serialize_cohort(cohort, out_stays, out_micro)
    assert out_stays.read_bytes() == stays_path.read_bytes()
    assert out_micro.read_bytes() == micro_path.read_bytes()
