"""Accuracy and confusion-count evaluation for classifiers."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["EvalResult", "evaluate"]


@dataclass
class EvalResult:
    """Fraction correct plus the full confusion-count matrix (true x predicted)."""

    accuracy: float
    confusion: np.ndarray
    n_samples: int

    def per_class_accuracy(self) -> np.ndarray:
        totals = self.confusion.sum(axis=1)
        with np.errstate(invalid="ignore", divide="ignore"):
            return np.where(totals > 0, np.diag(self.confusion) / totals, 0.0)


def evaluate(predictor, x, y, n_classes: int = 10) -> EvalResult:
    """Run a predictor over a labeled subset.

    ``predictor`` is either an object with .predict or a callable mapping
    the sample batch to predicted labels.
    """
    x = np.asarray(x)
    y = np.asarray(y, dtype=int)
    if len(x) == 0:
        raise ValueError("evaluation subset is empty")
    predict = getattr(predictor, "predict", predictor)
    pred = np.asarray(predict(x), dtype=int)
    confusion = np.zeros((n_classes, n_classes), dtype=int)
    np.add.at(confusion, (y, pred), 1)
    return EvalResult(
        accuracy=float(np.mean(pred == y)),
        confusion=confusion,
        n_samples=len(x),
    )
