"""ROC/AUC computation and the batch report emissions.

AUC uses the Mann-Whitney statistic with mid-rank tie handling; the ROC
curve moves tied scores as one block, so its trapezoidal area equals the
pairwise statistic exactly.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .errors import EvalError
from .features import FeatureMatrix
from .ingest import STUDY_ANTIBIOTICS, STUDY_ORGANISMS

MODEL_ROSTER = ("ab", "l1lr", "rf", "nn", "gbm", "ensemble")


def _check_two_classes(labels: np.ndarray) -> tuple[int, int]:
    n_pos = int(np.sum(labels == 1))
    n_neg = labels.size - n_pos
    if n_pos == 0 or n_neg == 0:
        raise EvalError("need at least one positive and one negative label")
    return n_pos, n_neg


def auc(scores: Sequence[float], labels: Sequence[int]) -> float:
    """Probability a random positive outranks a random negative, ties half."""
    scores = np.asarray(scores, dtype=float)
    labels = np.asarray(labels)
    n_pos, n_neg = _check_two_classes(labels)
    order = np.argsort(scores, kind="mergesort")
    sorted_scores = scores[order]
    boundaries = np.flatnonzero(np.diff(sorted_scores) != 0.0) + 1
    starts = np.concatenate(([0], boundaries))
    ends = np.concatenate((boundaries, [scores.size]))
    midranks = (starts + ends + 1) / 2.0  # 1-based mid-rank per tie block
    ranks = np.empty(scores.size)
    ranks[order] = np.repeat(midranks, ends - starts)
    rank_sum = ranks[np.asarray(labels) == 1].sum()
    return float((rank_sum - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg))


@dataclass
class RocCurve:
    fpr: np.ndarray
    tpr: np.ndarray

    @property
    def points(self) -> list[tuple[float, float]]:
        return list(zip(self.fpr.tolist(), self.tpr.tolist()))

    def trapezoid_area(self) -> float:
        return float(np.trapezoid(self.tpr, self.fpr))


def roc_curve(scores: Sequence[float], labels: Sequence[int]) -> RocCurve:
    """Curve from threshold +inf down to -inf; tied scores move together."""
    scores = np.asarray(scores, dtype=float)
    labels = np.asarray(labels)
    n_pos, n_neg = _check_two_classes(labels)
    order = np.argsort(-scores, kind="mergesort")
    sorted_scores = scores[order]
    sorted_pos = (labels[order] == 1).astype(float)
    block_ends = np.flatnonzero(np.diff(sorted_scores) != 0.0)
    block_ends = np.concatenate((block_ends, [scores.size - 1]))
    tp = np.cumsum(sorted_pos)[block_ends]
    fp = (block_ends + 1) - tp
    fpr = np.concatenate(([0.0], fp / n_neg))
    tpr = np.concatenate(([0.0], tp / n_pos))
    return RocCurve(fpr=fpr, tpr=tpr)


def evaluate_all(models: dict, test: FeatureMatrix) -> dict[str, float]:
    """Test-fold AUC per model, keyed and ordered by the fixed roster."""
    results = {}
    for name in MODEL_ROSTER:
        if name in models:
            results[name] = auc(models[name].predict(test), test.labels)
    for name in models:
        if name not in MODEL_ROSTER:
            results[name] = auc(models[name].predict(test), test.labels)
    return results


@dataclass
class OrganismRow:
    organism: str
    auc_l1lr: Optional[float]
    auc_ab: Optional[float]
    sample_size: int
    evaluable: bool


def evaluate_per_organism(
    test: FeatureMatrix, per_organism_models: dict, ab_model
) -> list[OrganismRow]:
    """One row per organism, sorted by descending per-organism model AUC.

    Organisms whose test rows contain a single class (or that have no fitted
    model) are flagged not-evaluable instead of failing the run.
    """
    organisms = np.asarray(test.organisms)
    rows = []
    for organism in STUDY_ORGANISMS:
        mask = organisms == organism
        size = int(mask.sum())
        if size == 0:
            continue
        sub = test.subset(np.flatnonzero(mask))
        model = per_organism_models.get(organism)
        single_class = sub.labels.min() == sub.labels.max() if size else True
        if model is None or single_class:
            rows.append(OrganismRow(organism, None, None, size, evaluable=False))
            continue
        rows.append(
            OrganismRow(
                organism,
                auc(model.predict(sub), sub.labels),
                auc(ab_model.predict(sub), sub.labels),
                size,
                evaluable=True,
            )
        )
    rows.sort(key=lambda r: (-(r.auc_l1lr if r.evaluable else -np.inf), r.organism))
    return rows


def summarize_rates(
    organisms: Sequence[str], antibiotics: Sequence[str], labels: Sequence[int]
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(mean rate, total count, resistant count) grids over the 6x10 study
    cells; rate is NaN where a cell has no tests."""
    org_index = {o: i for i, o in enumerate(STUDY_ORGANISMS)}
    anti_index = {a: j for j, a in enumerate(STUDY_ANTIBIOTICS)}
    totals = np.zeros((len(STUDY_ORGANISMS), len(STUDY_ANTIBIOTICS)))
    resistant = np.zeros_like(totals)
    for organism, antibiotic, label in zip(organisms, antibiotics, labels):
        i, j = org_index[organism], anti_index[antibiotic]
        totals[i, j] += 1
        resistant[i, j] += int(label)
    with np.errstate(invalid="ignore", divide="ignore"):
        rates = np.where(totals > 0, resistant / np.maximum(totals, 1), np.nan)
    return rates, totals, resistant


def rates_over_time(
    organisms: Sequence[str],
    antibiotics: Sequence[str],
    years: Sequence[int],
    labels: Sequence[int],
    min_count: int = 100,
) -> dict[tuple[str, str], list[tuple[int, float, int]]]:
    """Per-year (year, rate, count) series for cells with >= min_count tests."""
    cells: dict[tuple[str, str], dict[int, list[int]]] = {}
    for organism, antibiotic, year, label in zip(organisms, antibiotics, years, labels):
        per_year = cells.setdefault((organism, antibiotic), {})
        bucket = per_year.setdefault(int(year), [0, 0])
        bucket[0] += 1
        bucket[1] += int(label)
    series = {}
    for key in sorted(cells):
        per_year = cells[key]
        total = sum(v[0] for v in per_year.values())
        if total < min_count:
            continue
        series[key] = [
            (year, per_year[year][1] / per_year[year][0], per_year[year][0])
            for year in sorted(per_year)
        ]
    return series


# ---------------------------------------------------------------------------
# report emissions


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        if np.isnan(value):
            return ""
        return format(value, ".10g")
    return str(value)


def _open_report(path: str | Path, header_comment: Optional[str]):
    fh = open(path, "w", newline="\n")
    if header_comment:
        fh.write(f"# {header_comment}\n")
    return fh


def write_auc_report(
    path: str | Path,
    rows: Sequence[tuple[str, Optional[float], Optional[float]]],
    header_comment: Optional[str] = None,
) -> None:
    with _open_report(path, header_comment) as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["method", "auc", "auc_time"])
        for method, auc_random, auc_time in rows:
            writer.writerow([method, _fmt(auc_random), _fmt(auc_time)])


def write_organism_report(
    path: str | Path, rows: Sequence[OrganismRow], header_comment: Optional[str] = None
) -> None:
    with _open_report(path, header_comment) as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["organism", "auc", "auc_ab", "sample_size", "note"])
        for row in rows:
            writer.writerow([
                row.organism,
                _fmt(row.auc_l1lr),
                _fmt(row.auc_ab),
                row.sample_size,
                "" if row.evaluable else "not_evaluable",
            ])


def write_coefficient_report(
    path: str | Path,
    features: Sequence[str],
    coefficients: Sequence[float],
    header_comment: Optional[str] = None,
    top: int = 20,
) -> None:
    """Largest-magnitude model coefficients, descending by |coefficient|."""
    order = sorted(
        range(len(features)), key=lambda j: (-abs(coefficients[j]), features[j])
    )
    with _open_report(path, header_comment) as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["feature", "coefficient"])
        for j in order[:top]:
            writer.writerow([features[j], _fmt(float(coefficients[j]))])


def write_roc_csv(path: str | Path, curve: RocCurve, header_comment: Optional[str] = None) -> None:
    with _open_report(path, header_comment) as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["fpr", "tpr"])
        for fpr, tpr in zip(curve.fpr, curve.tpr):
            writer.writerow([_fmt(float(fpr)), _fmt(float(tpr))])


def write_grid_csv(
    path: str | Path,
    grid: np.ndarray,
    value_name: str,
    header_comment: Optional[str] = None,
    integer: bool = False,
) -> None:
    with _open_report(path, header_comment) as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["organism", "antibiotic", value_name])
        for i, organism in enumerate(STUDY_ORGANISMS):
            for j, antibiotic in enumerate(STUDY_ANTIBIOTICS):
                value = grid[i, j]
                if integer:
                    writer.writerow([organism, antibiotic, int(value)])
                else:
                    writer.writerow([organism, antibiotic, _fmt(float(value))])


def write_yearly_csv(
    path: str | Path,
    series: dict[tuple[str, str], list[tuple[int, float, int]]],
    header_comment: Optional[str] = None,
) -> None:
    with _open_report(path, header_comment) as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["organism", "antibiotic", "year", "rate", "count"])
        for (organism, antibiotic), points in series.items():
            for year, rate, count in points:
                writer.writerow([organism, antibiotic, year, _fmt(rate), count])
