"""Confusion matrices and the usual imbalanced-classification arithmetic.

Per-class precision/recall/F1/support with macro and weighted averages,
overall accuracy, and MAE/MSE over predicted probabilities.  The safe
(target) class is reported first, as the positive class.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import LengthMismatch
from .features import Label

CLASS_DISPLAY = {Label.TARGET: "Safe", Label.SANDBOX: "Unsafe"}


@dataclass(frozen=True)
class ConfusionMatrix:
    """Counts indexed by (actual, predicted) over {target, sandbox}."""

    counts: tuple[tuple[int, int], tuple[int, int]]

    def __post_init__(self):
        if any(c < 0 for row in self.counts for c in row):
            raise ValueError("negative cell count")
        if self.total < 1:
            raise ValueError("confusion matrix is empty")

    @property
    def total(self) -> int:
        return sum(c for row in self.counts for c in row)

    def actual_count(self, label: Label) -> int:
        return sum(self.counts[int(label)])

    def predicted_count(self, label: Label) -> int:
        return self.counts[0][int(label)] + self.counts[1][int(label)]

    def correct_count(self, label: Label) -> int:
        return self.counts[int(label)][int(label)]


@dataclass(frozen=True)
class ClassMetrics:
    precision: float
    recall: float
    f1: float
    support: int


@dataclass(frozen=True)
class EvalReport:
    confusion: ConfusionMatrix
    per_class: dict[Label, ClassMetrics]
    macro_avg: ClassMetrics
    weighted_avg: ClassMetrics
    accuracy: float
    mae: float | None = None
    mse: float | None = None


def confusion(pred, actual) -> ConfusionMatrix:
    """Tally (actual, predicted) label pairs."""
    pred = list(pred)
    actual = list(actual)
    if len(pred) != len(actual):
        raise LengthMismatch(f"{len(pred)} predictions vs {len(actual)} labels")
    if not pred:
        raise LengthMismatch("empty label sequences")
    cells = [[0, 0], [0, 0]]
    for p, a in zip(pred, actual):
        cells[int(a)][int(p)] += 1
    return ConfusionMatrix(counts=(tuple(cells[0]), tuple(cells[1])))


def _safe_div(num: float, den: float) -> float:
    return num / den if den else 0.0


def class_metrics(cm: ConfusionMatrix) -> dict[Label, ClassMetrics]:
    """Precision/recall/F1/support per class, with 0/0 reported as 0."""
    out = {}
    for label in (Label.TARGET, Label.SANDBOX):
        correct = cm.correct_count(label)
        precision = _safe_div(correct, cm.predicted_count(label))
        recall = _safe_div(correct, cm.actual_count(label))
        f1 = _safe_div(2.0 * precision * recall, precision + recall)
        out[label] = ClassMetrics(precision, recall, f1, cm.actual_count(label))
    return out


def aggregate_metrics(per_class: dict[Label, ClassMetrics]) -> tuple[ClassMetrics, ClassMetrics]:
    """(macro, weighted) averages; both carry the summed support."""
    classes = list(per_class.values())
    total = sum(c.support for c in classes)
    if total < 1:
        raise ValueError("no class has support")
    k = len(classes)
    macro = ClassMetrics(
        precision=sum(c.precision for c in classes) / k,
        recall=sum(c.recall for c in classes) / k,
        f1=sum(c.f1 for c in classes) / k,
        support=total,
    )
    weighted = ClassMetrics(
        precision=sum(c.precision * c.support for c in classes) / total,
        recall=sum(c.recall * c.support for c in classes) / total,
        f1=sum(c.f1 * c.support for c in classes) / total,
        support=total,
    )
    return macro, weighted


def accuracy(cm: ConfusionMatrix) -> float:
    return (cm.correct_count(Label.TARGET) + cm.correct_count(Label.SANDBOX)) / cm.total


def regression_errors(probs, labels) -> tuple[float, float]:
    """(mean absolute error, mean squared error) of probabilities vs labels."""
    p = np.asarray(list(probs), dtype=float)
    y = np.asarray([int(l) for l in labels], dtype=float)
    if p.shape != y.shape:
        raise LengthMismatch(f"{p.shape[0]} probabilities vs {y.shape[0]} labels")
    if p.size == 0:
        raise LengthMismatch("empty sequences")
    err = p - y
    return float(np.mean(np.abs(err))), float(np.mean(err ** 2))


def evaluate_predictions(pred, actual, probs=None) -> EvalReport:
    """Full report from predicted labels (and optional probabilities)."""
    cm = confusion(pred, actual)
    per_class = class_metrics(cm)
    macro, weighted = aggregate_metrics(per_class)
    mae = mse = None
    if probs is not None:
        mae, mse = regression_errors(probs, actual)
    return EvalReport(confusion=cm, per_class=per_class, macro_avg=macro,
                      weighted_avg=weighted, accuracy=accuracy(cm), mae=mae, mse=mse)


def report_to_dict(report: EvalReport) -> dict:
    def metric_row(m: ClassMetrics) -> dict:
        return {"precision": m.precision, "recall": m.recall, "f1": m.f1,
                "support": m.support}

    doc = {
        "confusion": [list(row) for row in report.confusion.counts],
        "per_class": {CLASS_DISPLAY[label].lower(): metric_row(m)
                      for label, m in report.per_class.items()},
        "macro_avg": metric_row(report.macro_avg),
        "weighted_avg": metric_row(report.weighted_avg),
        "accuracy": report.accuracy,
    }
    if report.mae is not None:
        doc["mae"] = report.mae
        doc["mse"] = report.mse
    return doc


def format_report(report: EvalReport) -> str:
    """Fixed-width metrics table plus the accuracy line.

    Metric values render at two decimals, accuracy at two decimals of
    percent; the underlying report keeps full precision.
    """
    rows = [(CLASS_DISPLAY[label], report.per_class[label])
            for label in (Label.TARGET, Label.SANDBOX)]
    rows.append(("Macro Average", report.macro_avg))
    rows.append(("Weighted Average", report.weighted_avg))

    lines = [f"{'Metrics':<18}{'Precision':>10}{'Recall':>8}{'F1-score':>10}{'Support':>9}"]
    for name, m in rows:
        lines.append(f"{name:<18}{m.precision:>10.2f}{m.recall:>8.2f}"
                     f"{m.f1:>10.2f}{m.support:>9d}")
    lines.append("")
    lines.append(f"Accuracy: {report.accuracy * 100.0:.2f}%")
    if report.mae is not None:
        lines.append(f"Mean Absolute Error: {report.mae:.4f}")
        lines.append(f"Mean Squared Error: {report.mse:.4f}")
    return "\n".join(lines) + "\n"
