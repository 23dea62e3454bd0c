"""Confusion matrix and accuracy/precision/recall reporting.

Macro averages (unweighted class means) are the headline numbers; weighted
averages are emitted alongside so either convention can be compared. A class
absent from both truth and predictions contributes 0 to the macro means,
keeping them defined on small evaluation sets.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class EvalReport:
    """Evaluation summary: confusion counts plus derived rates in [0, 1]."""

    confusion: np.ndarray  # (n_classes, n_classes), rows = true, cols = predicted
    accuracy: float
    precision: np.ndarray  # per class
    recall: np.ndarray
    precision_macro: float
    recall_macro: float
    precision_weighted: float
    recall_weighted: float

    def to_dict(self) -> dict:
        return {
            "confusion": self.confusion.tolist(),
            "accuracy": self.accuracy,
            "precision_per_class": self.precision.tolist(),
            "recall_per_class": self.recall.tolist(),
            "precision_macro": self.precision_macro,
            "recall_macro": self.recall_macro,
            "precision_weighted": self.precision_weighted,
            "recall_weighted": self.recall_weighted,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "EvalReport":
        return cls(
            confusion=np.asarray(data["confusion"], dtype=np.int64),
            accuracy=data["accuracy"],
            precision=np.asarray(data["precision_per_class"]),
            recall=np.asarray(data["recall_per_class"]),
            precision_macro=data["precision_macro"],
            recall_macro=data["recall_macro"],
            precision_weighted=data["precision_weighted"],
            recall_weighted=data["recall_weighted"],
        )


def _safe_rate(hits: np.ndarray, totals: np.ndarray) -> np.ndarray:
    return np.divide(hits, totals, out=np.zeros_like(hits, dtype=np.float64),
                     where=totals > 0)


def evaluate(predictions: np.ndarray, truth: np.ndarray, n_classes: int) -> EvalReport:
    """Score predictions against truth over ``n_classes`` classes.

    Per-class precision is TP/(TP+FP), 0 when the class was never predicted;
    recall is TP/(TP+FN), 0 when the class never occurs in truth.
    """
    predictions = np.asarray(predictions, dtype=np.int64)
    truth = np.asarray(truth, dtype=np.int64)
    if predictions.shape != truth.shape or predictions.ndim != 1:
        raise ValueError(f"predictions {predictions.shape} and truth {truth.shape} "
                         f"must be equal-length vectors")
    if predictions.size == 0:
        raise ValueError("nothing to evaluate")
    for name, vec in (("predictions", predictions), ("truth", truth)):
        if vec.min() < 0 or vec.max() >= n_classes:
            raise ValueError(f"{name} contain labels outside [0, {n_classes})")

    confusion = np.zeros((n_classes, n_classes), dtype=np.int64)
    np.add.at(confusion, (truth, predictions), 1)
    diag = np.diagonal(confusion).astype(np.float64)
    row_sums = confusion.sum(axis=1).astype(np.float64)  # per-class truth counts
    col_sums = confusion.sum(axis=0).astype(np.float64)  # per-class prediction counts
    precision = _safe_rate(diag, col_sums)
    recall = _safe_rate(diag, row_sums)
    support = row_sums / truth.size
    return EvalReport(
        confusion=confusion,
        accuracy=float(diag.sum() / truth.size),
        precision=precision,
        recall=recall,
        precision_macro=float(precision.mean()),
        recall_macro=float(recall.mean()),
        precision_weighted=float((precision * support).sum()),
        recall_weighted=float((recall * support).sum()),
    )


def format_ablation_table(rows: dict[str, EvalReport]) -> str:
    """Aligned text table of accuracy/precision/recall percentages per row.

    Row order follows the dict; callers list single-modality rows first and
    the fused run last.
    """
    header = ("Modalities", "Accuracy%", "Precision%", "Recall%")
    body = [
        (name,
         f"{100.0 * report.accuracy:.2f}",
         f"{100.0 * report.precision_macro:.2f}",
         f"{100.0 * report.recall_macro:.2f}")
        for name, report in rows.items()
    ]
    widths = [max(len(line[col]) for line in [header] + body) for col in range(4)]
    lines = []
    for line in [header] + body:
        lines.append("  ".join(cell.ljust(widths[i]) for i, cell in enumerate(line)).rstrip())
    return "\n".join(lines)
