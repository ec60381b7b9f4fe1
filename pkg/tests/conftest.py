import csv

import numpy as np
import pytest

from amrbench.ingest import MICRO_COLUMNS, STAY_COLUMNS, load_tables

STAY_DEFAULTS = {
    "patient_unit_stay_id": "S1",
    "patient_id": "P1",
    "gender": "Female",
    "age": "64",
    "ethnicity": "Caucasian",
    "height_cm": "168.0",
    "admit_weight_kg": "80.5",
    "discharge_weight_kg": "79.0",
    "unit_location_id": "loc_01",
    "unit_type": "MICU",
    "unit_stay_type": "admit",
    "unit_admit_source": "Emergency Department",
    "hospital_admit_source": "Emergency Department",
    "hospital_admit_offset_min": "-120",
    "icu_visit_number": "1",
    "admission_dx": "Sepsis, pulmonary",
    "unit_admit_year": "2010",
}

MICRO_DEFAULTS = {
    "test_id": "T1",
    "patient_unit_stay_id": "S1",
    "culture_taken_offset_min": "600",
    "culture_taken_year": "2010",
    "culture_site": "Blood",
    "organism": "Escherichia coli",
    "antibiotic": "ampicillin",
    "sensitivity": "Sensitive",
}


def stay_row(**overrides):
    row = dict(STAY_DEFAULTS)
    row.update({k: str(v) for k, v in overrides.items()})
    return row


def micro_row(**overrides):
    row = dict(MICRO_DEFAULTS)
    row.update({k: str(v) for k, v in overrides.items()})
    return row


def write_tables(tmp_path, stays, micros, stay_name="stays.csv", micro_name="micro.csv"):
    stays_path = tmp_path / stay_name
    micro_path = tmp_path / micro_name
    with open(stays_path, "w", newline="\n") as fh:
        writer = csv.DictWriter(fh, fieldnames=STAY_COLUMNS, lineterminator="\n")
        writer.writeheader()
        writer.writerows(stays)
    with open(micro_path, "w", newline="\n") as fh:
        writer = csv.DictWriter(fh, fieldnames=MICRO_COLUMNS, lineterminator="\n")
        writer.writeheader()
        writer.writerows(micros)
    return stays_path, micro_path


def load_fixture(tmp_path, stays, micros):
    return load_tables(*write_tables(tmp_path, stays, micros))


@pytest.fixture
def rng():
    return np.random.default_rng(20260810)
