"""Dataset evaluation: accuracy, confusion matrix, and error statistics.

Runs a configured end-to-end pipeline over subject records and aggregates
classification accuracy (overall, per class, per sex), a 5x5 confusion
matrix, the ground-truth class distribution, and per-measurement absolute
error means/standard deviations split by correct vs incorrect
classification. Per-record pipeline failures are recorded, not fatal:
records with ground truth count as misclassifications, and the confusion
matrix covers the records that produced a prediction.
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from bodyshape.classifier import CLASS_ORDER, BodyShape
from bodyshape.errors import (
    BodyShapeError,
    EmptyDataset,
    NoMeasurementGroundTruth,
)
from bodyshape.ingest import SubjectRecord

MEASURE_NAMES = ("bust", "waist", "hip")

# Population standard deviation (divide by n). Toggle when reconciling
# against datasets whose published tables used the sample estimator.
STD_DDOF = 0


@dataclass
class RecordOutcome:
    record: SubjectRecord
    predicted: BodyShape | None = None
    measured: tuple[float, float, float] | None = None
    error: str | None = None

    @property
    def correct(self) -> bool | None:
        if self.record.true_shape is None:
            return None
        if self.predicted is None:
            return False
        return self.predicted == self.record.true_shape


@dataclass
class EvalReport:
    n_total: int
    n_correct: int
    n_failed: int
    accuracy_pct: float | None
    per_class: dict[str, dict[str, float | int | None]]
    confusion: list[list[int]]
    class_distribution: dict[str, int]
    per_sex_accuracy_pct: dict[str, float | None]
    measurement_errors: dict[str, dict[str, dict[str, float | int | None]]]
    failures: list[dict[str, str]]
    std_mode: str = "population"
    outcomes: list[RecordOutcome] = field(default_factory=list, repr=False)

    def to_dict(self) -> dict:
        return {
            "n_total": self.n_total,
            "n_correct": self.n_correct,
            "n_failed": self.n_failed,
            "accuracy_pct": self.accuracy_pct,
            "per_class": self.per_class,
            "confusion_labels": [s.value for s in CLASS_ORDER],
            "confusion": self.confusion,
            "class_distribution": self.class_distribution,
            "per_sex_accuracy_pct": self.per_sex_accuracy_pct,
            "measurement_errors_cm": self.measurement_errors,
            "failures": self.failures,
            "std_mode": self.std_mode,
        }

    def to_json(self, indent: int = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent, sort_keys=True)

    def histogram_csv(self) -> str:
        lines = ["shape,count"]
        lines += [f"{label},{count}" for label, count in self.class_distribution.items()]
        return "\n".join(lines) + "\n"


def _mean_std(values: list[float]) -> dict[str, float | int | None]:
    if not values:
        return {"mean": None, "std": None, "n": 0}
    arr = np.asarray(values, dtype=np.float64)
    return {
        "mean": float(arr.mean()),
        "std": float(arr.std(ddof=STD_DDOF)),
        "n": int(arr.size),
    }


def evaluate(records: list[SubjectRecord], pipeline, workers: int = 1) -> EvalReport:
    """Run ``pipeline(record)`` over every record and aggregate metrics.

    ``pipeline`` returns an object with ``shape`` and ``measurements``
    attributes or raises a BodyShapeError. Aggregation is order-independent,
    so ``workers > 1`` fans records out across threads without changing any
    metric.
    """
    if not records:
        raise EmptyDataset("no records to evaluate")

    def run_one(record: SubjectRecord) -> RecordOutcome:
        try:
            result = pipeline(record)
        except BodyShapeError as exc:
            return RecordOutcome(record, error=f"{type(exc).__name__}: {exc}")
        m = result.measurements
        return RecordOutcome(record, predicted=result.shape,
                             measured=(m.bust, m.waist, m.hip))

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(run_one, records))
    else:
        outcomes = [run_one(r) for r in records]

    with_gt = [o for o in outcomes if o.record.true_shape is not None]
    n_total = len(with_gt)
    n_correct = sum(1 for o in with_gt if o.correct)
    accuracy = 100.0 * n_correct / n_total if n_total else None

    index = {shape: i for i, shape in enumerate(CLASS_ORDER)}
    confusion = np.zeros((len(CLASS_ORDER), len(CLASS_ORDER)), dtype=np.int64)
    for o in with_gt:
        if o.predicted is not None:
            confusion[index[o.record.true_shape], index[o.predicted]] += 1

    per_class: dict[str, dict[str, float | int | None]] = {}
    for shape, i in index.items():
        support = int(sum(1 for o in with_gt if o.record.true_shape == shape))
        tp = int(confusion[i, i])
        pred_count = int(confusion[:, i].sum())
        per_class[shape.value] = {
            "support": support,
            "precision": tp / pred_count if pred_count else None,
            "recall": tp / support if support else None,
        }

    distribution = {
        shape.value: int(sum(1 for o in with_gt if o.record.true_shape == shape))
        for shape in CLASS_ORDER
    }

    per_sex: dict[str, float | None] = {}
    for sex in ("male", "female"):
        subset = [o for o in with_gt if o.record.sex == sex]
        per_sex[sex] = (
            100.0 * sum(1 for o in subset if o.correct) / len(subset) if subset else None
        )

    split: dict[str, dict[str, list[float]]] = {
        name: {"correct": [], "incorrect": []} for name in MEASURE_NAMES
    }
    for o in with_gt:
        if o.measured is None or not o.record.has_measurements:
            continue
        bucket = "correct" if o.correct else "incorrect"
        truth = (o.record.true_bust, o.record.true_waist, o.record.true_hip)
        for name, measured, true in zip(MEASURE_NAMES, o.measured, truth):
            split[name][bucket].append(abs(measured - true))
    measurement_errors = {
        name: {bucket: _mean_std(vals) for bucket, vals in buckets.items()}
        for name, buckets in split.items()
    }

    failures = [
        {"image": str(o.record.image_path), "error": o.error}
        for o in outcomes
        if o.error is not None
    ]

    return EvalReport(
        n_total=n_total,
        n_correct=n_correct,
        n_failed=len(failures),
        accuracy_pct=accuracy,
        per_class=per_class,
        confusion=confusion.tolist(),
        class_distribution=distribution,
        per_sex_accuracy_pct=per_sex,
        measurement_errors=measurement_errors,
        failures=failures,
        outcomes=outcomes,
    )


def error_table(report: EvalReport) -> str:
    """Plain-text table of absolute measurement errors, mean +/- std in cm,
    split by correct and incorrect classifications."""
    any_gt = any(
        report.measurement_errors[name][bucket]["n"]
        for name in MEASURE_NAMES
        for bucket in ("correct", "incorrect")
    )
    if not any_gt:
        raise NoMeasurementGroundTruth("no record carries tape measurements")

    def cell(stats: dict[str, float | int | None]) -> str:
        if not stats["n"]:
            return "-"
        return f"{stats['mean']:.2f} ± {stats['std']:.2f}"

    header = f"{'Measurement':<12} | {'Correct':>14} | {'Incorrect':>14}"
    rows = [header, "-" * len(header)]
    for name in MEASURE_NAMES:
        stats = report.measurement_errors[name]
        rows.append(
            f"{name.capitalize():<12} | {cell(stats['correct']):>14} | "
            f"{cell(stats['incorrect']):>14}"
        )
    return "\n".join(rows)


def confusion_table(report: EvalReport) -> str:
    """Plain-text confusion matrix, rows = ground truth, columns = predicted."""
    labels = [s.value for s in CLASS_ORDER]
    width = max(len(label) for label in labels) + 1
    head = " " * width + "".join(f"{label:>{width}}" for label in labels)
    lines = [head]
    for label, row in zip(labels, report.confusion):
        lines.append(f"{label:<{width}}" + "".join(f"{v:>{width}}" for v in row))
    return "\n".join(lines)


@dataclass(frozen=True)
class PairCheck:
    """Robustness comparison of two runs of the same subject."""

    same_class: bool
    deltas_cm: tuple[float, float, float]
    max_delta_cm: float
    ok: bool


def check_pair(result_a, result_b, bound_cm: float = 3.0) -> PairCheck:
    """Compare two pipeline results of one subject in different settings."""
    ma, mb = result_a.measurements, result_b.measurements
    deltas = (abs(ma.bust - mb.bust), abs(ma.waist - mb.waist), abs(ma.hip - mb.hip))
    same = result_a.shape == result_b.shape
    max_delta = max(deltas)
    return PairCheck(same, deltas, max_delta, same and max_delta <= bound_cm)
