"""Confusion-matrix metrics with label 1 as the positive class.

Counts are collected per instance and pooled across folds before scoring,
which keeps precision/recall/F1/MCC well defined under leave-one-out style
evaluation where a single test fold may contain only one class.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .booster import determine
from .exceptions import DimensionError, InvalidInputError, UndefinedMetricError


class MetricMode(str, enum.Enum):
    ACCURACY = "accuracy"
    PRECISION = "precision"
    RECALL = "recall"
    F1 = "f1"
    MCC = "mcc"


class CorrectMode(str, enum.Enum):
    TP = "TP"
    FP = "FP"
    TN = "TN"
    FN = "FN"


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int = 0
    fp: int = 0
    tn: int = 0
    fn: int = 0

    def __post_init__(self):
        for name in ("tp", "fp", "tn", "fn"):
            v = getattr(self, name)
            if int(v) != v or v < 0:
                raise InvalidInputError(f"{name} must be a nonnegative integer, got {v!r}")
            object.__setattr__(self, name, int(v))

    def __add__(self, other: "ConfusionCounts") -> "ConfusionCounts":
        if not isinstance(other, ConfusionCounts):
            return NotImplemented
        return ConfusionCounts(
            self.tp + other.tp, self.fp + other.fp, self.tn + other.tn, self.fn + other.fn
        )

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn

    def get(self, mode) -> int:
        return getattr(self, CorrectMode(mode).value.lower())

    def to_dict(self) -> dict:
        return {"tp": self.tp, "fp": self.fp, "tn": self.tn, "fn": self.fn}

    @classmethod
    def merge(cls, counts) -> "ConfusionCounts":
        out = cls()
        for c in counts:
            out = out + c
        return out


def _check_pair(true_labels, raw_scores):
    y = np.asarray(true_labels, dtype=np.float64).ravel()
    raw = np.asarray(raw_scores, dtype=np.float64).ravel()
    if y.shape != raw.shape:
        raise DimensionError(f"{y.shape[0]} labels but {raw.shape[0]} scores")
    if not np.all((y == 0.0) | (y == 1.0)):
        raise InvalidInputError("labels must be 0 or 1")
    return y.astype(np.int64), raw


def confusion_from_predictions(true_labels, raw_scores) -> ConfusionCounts:
    """Tally TP/FP/TN/FN, predicting 1 exactly when the raw score is > 0."""
    y, raw = _check_pair(true_labels, raw_scores)
    pred = determine(raw)
    return ConfusionCounts(
        tp=int(np.sum((pred == 1) & (y == 1))),
        fp=int(np.sum((pred == 1) & (y == 0))),
        tn=int(np.sum((pred == 0) & (y == 0))),
        fn=int(np.sum((pred == 0) & (y == 1))),
    )


def correct_eval(mode, true_labels, raw_scores) -> int:
    """One component (``"TP"``, ``"FP"``, ``"TN"`` or ``"FN"``) of the confusion matrix."""
    return confusion_from_predictions(true_labels, raw_scores).get(mode)


def _ratio(num, den) -> float:
    return num / den if den else 0.0


def precision(c: ConfusionCounts) -> float:
    return _ratio(c.tp, c.tp + c.fp)


def recall(c: ConfusionCounts) -> float:
    return _ratio(c.tp, c.tp + c.fn)


def f1(c: ConfusionCounts) -> float:
    p, r = precision(c), recall(c)
    return _ratio(2 * p * r, p + r)


def mcc(c: ConfusionCounts) -> float:
    # exact integer product under the root; any zero factor gives 0
    den = (c.tp + c.fp) * (c.tp + c.fn) * (c.tn + c.fp) * (c.tn + c.fn)
    if den == 0:
        return 0.0
    return (c.tp * c.tn - c.fp * c.fn) / math.sqrt(den)


def accuracy(c: ConfusionCounts) -> float:
    return (c.tp + c.tn) / c.total


_SCORERS = {
    MetricMode.ACCURACY: accuracy,
    MetricMode.PRECISION: precision,
    MetricMode.RECALL: recall,
    MetricMode.F1: f1,
    MetricMode.MCC: mcc,
}


def score(mode, counts: ConfusionCounts) -> float:
    """Metric value from pooled counts.

    Precision, recall and F1 with a zero denominator return 0, as does MCC
    when any marginal is empty. An empty matrix raises UndefinedMetricError.
    """
    if counts.total == 0:
        raise UndefinedMetricError("no evaluated instances")
    return float(_SCORERS[MetricMode(mode)](counts))


def all_scores(counts: ConfusionCounts) -> dict:
    return {m.value: score(m, counts) for m in MetricMode}


def score_eval(mode, true_labels, raw_scores) -> float:
    return score(mode, confusion_from_predictions(true_labels, raw_scores))
