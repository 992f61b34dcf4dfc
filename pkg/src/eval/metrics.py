"""
Accuracy and cross-validation results.
"""

from dataclasses import dataclass
from typing import NamedTuple, Sequence, Tuple

import numpy as np


class ExperimentError(Exception):
    """Raised when an evaluation or experiment cannot run."""

    pass


def accuracy(confusion: np.ndarray) -> float:
    """Correct predictions (trace) over all predictions."""
    confusion = np.asarray(confusion)
    total = confusion.sum()
    if confusion.size == 0 or total == 0:
        raise ExperimentError("Accuracy of an empty confusion matrix is undefined")
    return float(np.trace(confusion) / total)


class AccuracySummary(NamedTuple):
    mean: float
    pooled: float
    stdev: float


def mean_and_pool(correct: Sequence[int], total: Sequence[int]) -> AccuracySummary:
    """Mean of per-fold accuracies and accuracy over all folds pooled."""
    if len(correct) != len(total) or not total:
        raise ExperimentError("Per-fold counts must be non-empty and of equal length")
    if any(t <= 0 for t in total):
        raise ExperimentError("Every fold needs at least one prediction")
    per_fold = np.asarray(correct, dtype=np.float64) / np.asarray(total, dtype=np.float64)
    return AccuracySummary(
        mean=float(per_fold.mean()),
        pooled=float(sum(correct) / sum(total)),
        stdev=float(per_fold.std(ddof=1)) if len(per_fold) > 1 else 0.0,
    )


@dataclass(frozen=True, eq=False)
class CVResult:
    """Per-fold accuracies plus the pooled confusion matrix (rows gold, columns predicted)."""

    labels: Tuple[str, ...]
    fold_correct: Tuple[int, ...]
    fold_total: Tuple[int, ...]
    confusion: np.ndarray

    def __post_init__(self):
        confusion = np.asarray(self.confusion, dtype=np.int64)
        if confusion.shape != (len(self.labels), len(self.labels)):
            raise ExperimentError(
                f"Confusion matrix of shape {confusion.shape} for {len(self.labels)} labels"
            )
        if int(np.trace(confusion)) != sum(self.fold_correct) or int(confusion.sum()) != sum(self.fold_total):
            raise ExperimentError("Confusion matrix does not match the per-fold counts")
        object.__setattr__(self, "confusion", confusion)

    @property
    def k(self) -> int:
        return len(self.fold_total)

    @property
    def per_fold_accuracy(self) -> Tuple[float, ...]:
        return tuple(c / t for c, t in zip(self.fold_correct, self.fold_total))

    @property
    def summary(self) -> AccuracySummary:
        return mean_and_pool(self.fold_correct, self.fold_total)

    @property
    def mean_accuracy(self) -> float:
        return self.summary.mean

    @property
    def pooled_accuracy(self) -> float:
        return accuracy(self.confusion)
