"""Loading, validation and cohort filtering of the raw study tables.

Inputs are two delimiter-separated files with header rows: one stay per row
in ``stays.csv`` and one culture-antibiotic test per row in ``micro.csv``.
Empty cells mean "missing". Rows whose sensitivity label is missing are
dropped (with a logged count) because the label is the prediction target;
any other malformed cell raises a row-level error instead of being guessed
around.
"""
from __future__ import annotations

import csv
import enum
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional

from .errors import IntegrityError, ParseError, SchemaError

logger = logging.getLogger(__name__)

STUDY_ORGANISMS = (
    "Staphylococcus aureus",
    "Escherichia coli",
    "Klebsiella pneumoniae",
    "Pseudomonas aeruginosa",
    "Staphylococcus epidermidis",
    "Enterobacter cloacae",
)

STUDY_ANTIBIOTICS = (
    "vancomycin",
    "imipenem/cilastatin",
    "cefipime",
    "oxacillin",
    "ciprofloxacin",
    "nitrofurantoin",
    "trimethoprim/sulfamethoxazole",
    "cefazolin",
    "ampicillin/sulbactam",
    "ampicillin",
)

MIN_AGE_YEARS = 16

STAY_COLUMNS = (
    "patient_unit_stay_id",
    "patient_id",
    "gender",
    "age",
    "ethnicity",
    "height_cm",
    "admit_weight_kg",
    "discharge_weight_kg",
    "unit_location_id",
    "unit_type",
    "unit_stay_type",
    "unit_admit_source",
    "hospital_admit_source",
    "hospital_admit_offset_min",
    "icu_visit_number",
    "admission_dx",
    "unit_admit_year",
)

MICRO_COLUMNS = (
    "test_id",
    "patient_unit_stay_id",
    "culture_taken_offset_min",
    "culture_taken_year",
    "culture_site",
    "organism",
    "antibiotic",
    "sensitivity",
)


class SensitivityLabel(enum.Enum):
    SENSITIVE = "Sensitive"
    INTERMEDIATE = "Intermediate"
    RESISTANT = "Resistant"

    @classmethod
    def parse(cls, text: str) -> "SensitivityLabel":
        value = text.strip().lower()
        for member in cls:
            if member.value.lower() == value:
                return member
        raise ParseError(f"unknown sensitivity label {text!r}")


def binarize_label(label: SensitivityLabel) -> int:
    """Resistant -> 1; Sensitive and Intermediate fold into non-Resistant -> 0."""
    return 1 if label is SensitivityLabel.RESISTANT else 0


@dataclass(frozen=True)
class PatientStay:
    patient_unit_stay_id: str
    patient_id: str
    gender: Optional[str]
    age: int
    ethnicity: Optional[str]
    height_cm: Optional[float]
    admit_weight_kg: Optional[float]
    discharge_weight_kg: Optional[float]
    unit_location_id: Optional[str]
    unit_type: Optional[str]
    unit_stay_type: Optional[str]
    unit_admit_source: Optional[str]
    hospital_admit_source: Optional[str]
    hospital_admit_offset_min: Optional[float]
    icu_visit_number: int
    admission_dx: Optional[str]
    unit_admit_year: int
    raw: tuple = field(repr=False, default=())


@dataclass(frozen=True)
class MicrobiologyTest:
    test_id: str
    patient_unit_stay_id: str
    culture_taken_offset_min: float
    culture_taken_year: int
    culture_site: Optional[str]
    organism: str
    antibiotic: str
    sensitivity: SensitivityLabel
    raw: tuple = field(repr=False, default=())


@dataclass(frozen=True)
class Cohort:
    stays: tuple[PatientStay, ...]
    tests: tuple[MicrobiologyTest, ...]

    def stay_by_id(self) -> dict[str, PatientStay]:
        return {s.patient_unit_stay_id: s for s in self.stays}


def _canon(text: str) -> str:
    return text.strip().lower()


_ORGANISM_CANON = {_canon(o): o for o in STUDY_ORGANISMS}
_ANTIBIOTIC_CANON = {_canon(a): a for a in STUDY_ANTIBIOTICS}


def _cell(row: dict, column: str) -> Optional[str]:
    value = row.get(column)
    if value is None:
        return None
    value = value.strip()
    return value if value != "" else None


def _require(row: dict, column: str, table: str, row_index: int) -> str:
    value = _cell(row, column)
    if value is None:
        raise ParseError(f"{table} row {row_index}: missing required value in column {column!r}")
    return value


def _parse_int(text: str, table: str, row_index: int, column: str) -> int:
    try:
        return int(text)
    except ValueError:
        raise ParseError(
            f"{table} row {row_index}: cannot parse {text!r} in column {column!r} as integer"
        ) from None


def _parse_float(text: str, table: str, row_index: int, column: str) -> float:
    try:
        return float(text)
    except ValueError:
        raise ParseError(
            f"{table} row {row_index}: cannot parse {text!r} in column {column!r} as number"
        ) from None


def _parse_age(text: str, table: str, row_index: int) -> int:
    # eICU-style de-identification records ages above 89 as ">89".
    if text == ">89":
        return 90
    age = _parse_int(text, table, row_index, "age")
    if age < 0:
        raise ParseError(f"{table} row {row_index}: age must be >= 0, got {age}")
    return age


def _read_table(path: Path, required: Iterable[str], table: str) -> list[dict]:
    if not path.exists():
        raise SchemaError(f"{table} file not found: {path}")
    with open(path, "r", newline="") as fh:
        lines = [line for line in fh if not line.startswith("#")]
    reader = csv.DictReader(lines)
    header = reader.fieldnames
    if header is None:
        raise SchemaError(f"{table} file {path} is empty (no header row)")
    for column in required:
        if column not in header:
            raise SchemaError(f"{table} file {path} is missing required column {column!r}")
    return list(reader)


def _parse_stay(row: dict, row_index: int) -> PatientStay:
    table = "stays"
    stay_id = _require(row, "patient_unit_stay_id", table, row_index)
    visit = _parse_int(_require(row, "icu_visit_number", table, row_index), table, row_index, "icu_visit_number")
    if visit < 1:
        raise ParseError(f"{table} row {row_index}: icu_visit_number must be >= 1, got {visit}")

    def opt_float(column: str) -> Optional[float]:
        text = _cell(row, column)
        return None if text is None else _parse_float(text, table, row_index, column)

    raw = tuple(row.get(c, "") or "" for c in STAY_COLUMNS)
    return PatientStay(
        patient_unit_stay_id=stay_id,
        patient_id=_require(row, "patient_id", table, row_index),
        gender=_cell(row, "gender"),
        age=_parse_age(_require(row, "age", table, row_index), table, row_index),
        ethnicity=_cell(row, "ethnicity"),
        height_cm=opt_float("height_cm"),
        admit_weight_kg=opt_float("admit_weight_kg"),
        discharge_weight_kg=opt_float("discharge_weight_kg"),
        unit_location_id=_cell(row, "unit_location_id"),
        unit_type=_cell(row, "unit_type"),
        unit_stay_type=_cell(row, "unit_stay_type"),
        unit_admit_source=_cell(row, "unit_admit_source"),
        hospital_admit_source=_cell(row, "hospital_admit_source"),
        hospital_admit_offset_min=opt_float("hospital_admit_offset_min"),
        icu_visit_number=visit,
        admission_dx=_cell(row, "admission_dx"),
        unit_admit_year=_parse_int(
            _require(row, "unit_admit_year", table, row_index), table, row_index, "unit_admit_year"
        ),
        raw=raw,
    )


def _parse_test(row: dict, row_index: int) -> Optional[MicrobiologyTest]:
    table = "micro"
    sensitivity_text = _cell(row, "sensitivity")
    if sensitivity_text is None:
        return None  # target is missing; caller drops and counts the row
    try:
        sensitivity = SensitivityLabel.parse(sensitivity_text)
    except ParseError:
        raise ParseError(
            f"{table} row {row_index}: unknown sensitivity label {sensitivity_text!r}"
        ) from None
    raw = tuple(row.get(c, "") or "" for c in MICRO_COLUMNS)
    return MicrobiologyTest(
        test_id=_require(row, "test_id", table, row_index),
        patient_unit_stay_id=_require(row, "patient_unit_stay_id", table, row_index),
        culture_taken_offset_min=_parse_float(
            _require(row, "culture_taken_offset_min", table, row_index),
            table, row_index, "culture_taken_offset_min",
        ),
        culture_taken_year=_parse_int(
            _require(row, "culture_taken_year", table, row_index),
            table, row_index, "culture_taken_year",
        ),
        culture_site=_cell(row, "culture_site"),
        organism=_require(row, "organism", table, row_index),
        antibiotic=_require(row, "antibiotic", table, row_index),
        sensitivity=sensitivity,
        raw=raw,
    )


def load_tables(stay_file: str | Path, micro_file: str | Path) -> Cohort:
    """Load both tables, enforce the schema, and check referential integrity.

    Row order is preserved. Raises SchemaError / ParseError / IntegrityError
    with the offending column or row named in the message.
    """
    stay_rows = _read_table(Path(stay_file), STAY_COLUMNS, "stays")
    micro_rows = _read_table(Path(micro_file), MICRO_COLUMNS, "micro")

    stays = []
    seen_stays: set[str] = set()
    for index, row in enumerate(stay_rows):
        stay = _parse_stay(row, index)
        if stay.patient_unit_stay_id in seen_stays:
            raise IntegrityError(f"duplicate patient_unit_stay_id {stay.patient_unit_stay_id!r}")
        seen_stays.add(stay.patient_unit_stay_id)
        stays.append(stay)

    tests = []
    seen_tests: set[str] = set()
    dropped_missing_label = 0
    for index, row in enumerate(micro_rows):
        test = _parse_test(row, index)
        if test is None:
            dropped_missing_label += 1
            continue
        if test.test_id in seen_tests:
            raise IntegrityError(f"duplicate test_id {test.test_id!r}")
        seen_tests.add(test.test_id)
        if test.patient_unit_stay_id not in seen_stays:
            raise IntegrityError(
                f"micro row {index}: test {test.test_id!r} references unknown "
                f"patient_unit_stay_id {test.patient_unit_stay_id!r}"
            )
        tests.append(test)

    if dropped_missing_label:
        logger.info("dropped %d micro rows with missing sensitivity label", dropped_missing_label)
    logger.info("loaded %d stays, %d tests", len(stays), len(tests))
    return Cohort(stays=tuple(stays), tests=tuple(tests))


def apply_cohort_filter(
    cohort: Cohort,
    min_culture_offset_min: Optional[float] = None,
) -> Cohort:
    """Restrict to the study cohort: age >= 16, study organisms and antibiotics.

    Organism and antibiotic strings are matched case-insensitively after
    trimming and normalized to their canonical spelling. Stays left with no
    tests are dropped. ``min_culture_offset_min`` optionally excludes cultures
    taken before that offset (the source text does not say whether
    pre-admission cultures were kept, so the default keeps everything).
    Filtering is idempotent.
    """
    stay_by_id = cohort.stay_by_id()
    kept_tests = []
    for test in cohort.tests:
        stay = stay_by_id[test.patient_unit_stay_id]
        if stay.age < MIN_AGE_YEARS:
            continue
        organism = _ORGANISM_CANON.get(_canon(test.organism))
        antibiotic = _ANTIBIOTIC_CANON.get(_canon(test.antibiotic))
        if organism is None or antibiotic is None:
            continue
        if min_culture_offset_min is not None and test.culture_taken_offset_min < min_culture_offset_min:
            continue
        if organism != test.organism or antibiotic != test.antibiotic:
            test = MicrobiologyTest(
                test_id=test.test_id,
                patient_unit_stay_id=test.patient_unit_stay_id,
                culture_taken_offset_min=test.culture_taken_offset_min,
                culture_taken_year=test.culture_taken_year,
                culture_site=test.culture_site,
                organism=organism,
                antibiotic=antibiotic,
                sensitivity=test.sensitivity,
                raw=test.raw,
            )
        kept_tests.append(test)

    used_stays = {t.patient_unit_stay_id for t in kept_tests}
    kept_stays = tuple(s for s in cohort.stays if s.patient_unit_stay_id in used_stays)
    logger.info(
        "cohort filter kept %d/%d tests, %d/%d stays",
        len(kept_tests), len(cohort.tests), len(kept_stays), len(cohort.stays),
    )
    return Cohort(stays=kept_stays, tests=tuple(kept_tests))


def serialize_cohort(
    cohort: Cohort,
    stay_file: str | Path,
    micro_file: str | Path,
    header_comment: Optional[str] = None,
) -> None:
    """Write the accepted rows back out, preserving original cell text."""
    with open(stay_file, "w", newline="\n") as fh:
        if header_comment:
            fh.write(f"# {header_comment}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(STAY_COLUMNS)
        for stay in cohort.stays:
            writer.writerow(stay.raw)
    with open(micro_file, "w", newline="\n") as fh:
        if header_comment:
            fh.write(f"# {header_comment}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(MICRO_COLUMNS)
        for test in cohort.tests:
            writer.writerow(test.raw)
