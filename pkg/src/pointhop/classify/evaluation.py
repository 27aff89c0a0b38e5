from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass
from typing import Any

import numpy as np

from pointhop.errors import DimensionMismatch, EmptyTestSet


@dataclass(frozen=True)
class EvalReport:
    overall_accuracy: float
    average_accuracy: float
    confusion: np.ndarray  # confusion[true, predicted]
    per_class: tuple[float | None, ...]  # None for classes without test samples
    class_names: tuple[str, ...]

    @property
    def n_samples(self) -> int:
        return int(self.confusion.sum())

    def to_dict(self) -> dict[str, Any]:
        return {
            "overall_accuracy": self.overall_accuracy,
            "average_accuracy": self.average_accuracy,
            "n_samples": self.n_samples,
            "class_names": list(self.class_names),
            "per_class": list(self.per_class),
            "confusion": self.confusion.tolist(),
        }

    @classmethod
    def from_dict(cls, raw: dict[str, Any]) -> EvalReport:
        return cls(
            overall_accuracy=float(raw["overall_accuracy"]),
            average_accuracy=float(raw["average_accuracy"]),
            confusion=np.asarray(raw["confusion"], dtype=np.int64),
            per_class=tuple(raw["per_class"]),
            class_names=tuple(raw["class_names"]),
        )


def report_from_predictions(
    predictions: np.ndarray,
    labels: np.ndarray,
    class_names: Sequence[str],
) -> EvalReport:
    pred = np.asarray(predictions, dtype=np.int64)
    true = np.asarray(labels, dtype=np.int64)
    if true.size == 0:
        raise EmptyTestSet("no test samples")
    if pred.shape != true.shape:
        raise DimensionMismatch("predictions and labels differ in length")
    n_classes = len(class_names)
    confusion = np.zeros((n_classes, n_classes), dtype=np.int64)
    np.add.at(confusion, (true, pred), 1)
    support = confusion.sum(axis=1)
    hits = np.diag(confusion)
    per_class = tuple(
        float(hits[c] / support[c]) if support[c] else None for c in range(n_classes)
    )
    present = [acc for acc in per_class if acc is not None]
    return EvalReport(
        overall_accuracy=float(hits.sum() / true.size),
        average_accuracy=float(np.mean(present)),
        confusion=confusion,
        per_class=per_class,
        class_names=tuple(class_names),
    )


def format_report(report: EvalReport, *, per_class: bool = False) -> str:
    lines = [
        f"overall_accuracy={report.overall_accuracy:.4f} "
        f"average_accuracy={report.average_accuracy:.4f} samples={report.n_samples}"
    ]
    if per_class:
        width = max(len(name) for name in report.class_names)
        # weakest classes first; classes without test samples last
        rows = sorted(
            zip(report.class_names, report.per_class),
            key=lambda row: (row[1] is None, row[1] or 0.0),
        )
        for name, acc in rows:
            shown = "n/a" if acc is None else f"{acc:.4f}"
            lines.append(f"  {name:<{width}}  {shown}")
    return "\n".join(lines)
