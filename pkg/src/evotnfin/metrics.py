"""One-vs-rest confusion counts, classification metrics and argmax decoding."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .exceptions import DataError, EvaluationError

METRIC_NAMES = ("accuracy", "sensitivity", "specificity", "f1")


class DegenerateMetricWarning(UserWarning):
    """A metric had a zero denominator and was reported as 0."""


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int
    fp: int
    tn: int
    fn: int

    @property
    def total(self):
        return self.tp + self.fp + self.tn + self.fn

    def swapped(self):
        """Counts with the positive and negative roles exchanged."""
        return ConfusionCounts(tp=self.tn, fp=self.fn, tn=self.tp, fn=self.fp)


@dataclass(frozen=True)
class MetricSet:
    accuracy: float
    sensitivity: float
    specificity: float
    f1: float
    degenerate: tuple = field(default=(), compare=False)

    def as_dict(self):
        return {name: getattr(self, name) for name in METRIC_NAMES}


def confusion(predicted, actual, positive_class):
    predicted = list(predicted)
    actual = list(actual)
    if len(predicted) != len(actual):
        raise DataError(f"{len(predicted)} predictions for {len(actual)} labels")
    if not actual:
        raise DataError("confusion counts need at least one sample")
    tp = fp = tn = fn = 0
    for p, a in zip(predicted, actual):
        if a == positive_class:
            if p == positive_class:
                tp += 1
            else:
                fn += 1
        elif p == positive_class:
            fp += 1
        else:
            tn += 1
    return ConfusionCounts(tp, fp, tn, fn)


def _ratio(num, den, name, degenerate):
    if den == 0:
        degenerate.append(name)
        return Fraction(0)
    return Fraction(num, den)


def exact_metrics(c):
    """Metric values as exact fractions plus the names of 0/0 cases."""
    if c.total <= 0:
        raise DataError("confusion counts are empty")
    degenerate = []
    values = {
        "accuracy": _ratio(c.tp + c.tn, c.total, "accuracy", degenerate),
        "sensitivity": _ratio(c.tp, c.tp + c.fn, "sensitivity", degenerate),
        "specificity": _ratio(c.tn, c.tn + c.fp, "specificity", degenerate),
        "f1": _ratio(2 * c.tp, 2 * c.tp + c.fp + c.fn, "f1", degenerate),
    }
    return values, tuple(degenerate)


def metrics(c):
    """Accuracy, sensitivity, specificity and F1 for one set of counts.

    A zero denominator gives 0 and a DegenerateMetricWarning instead of an
    error, so one empty class does not abort a multi-cycle experiment.
    """
    values, degenerate = exact_metrics(c)
    if degenerate:
        warnings.warn(
            f"zero denominator for {', '.join(degenerate)} with counts {c}; reported as 0",
            DegenerateMetricWarning,
            stacklevel=2,
        )
    return MetricSet(**{k: float(v) for k, v in values.items()}, degenerate=degenerate)


def decide_class(outputs):
    """Index of the largest output; ties go to the lowest index."""
    outputs = np.asarray(outputs, dtype=float)
    if not np.all(np.isfinite(outputs)):
        raise EvaluationError(f"non-finite network output in {outputs}")
    return int(np.argmax(outputs))


def decide_classes(outputs):
    """Row-wise :func:`decide_class` for an (n_samples, n_classes) array."""
    outputs = np.asarray(outputs, dtype=float)
    if not np.all(np.isfinite(outputs)):
        raise EvaluationError("non-finite network output")
    return np.argmax(outputs, axis=1)


def per_class_metrics(predicted, actual, classes):
    """One-vs-rest MetricSet for each class in ``classes``."""
    return {k: metrics(confusion(predicted, actual, k)) for k in classes}
