"""Confusion matrices and weighted/unweighted average recall."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import DataError


@dataclass
class ConfusionMatrix:
    counts: np.ndarray  # [C, C], rows = true class, cols = predicted

    @property
    def n(self) -> int:
        return int(self.counts.sum())

    @property
    def n_classes(self) -> int:
        return self.counts.shape[0]

    def tolist(self) -> list[list[int]]:
        return self.counts.astype(int).tolist()


@dataclass
class MetricsReport:
    war: float
    uar: float
    per_class_recall: list[float | None]
    n: int
    confusion: list[list[int]] = field(default_factory=list)
    fold: int | None = None
    seed: int | None = None

    def to_dict(self) -> dict:
        return {
            "war": self.war,
            "uar": self.uar,
            "per_class_recall": self.per_class_recall,
            "n": self.n,
            "confusion": self.confusion,
            "fold": self.fold,
            "seed": self.seed,
        }


def confusion(preds, labels, C: int) -> ConfusionMatrix:
    preds = np.asarray(preds, dtype=np.int64).reshape(-1)
    labels = np.asarray(labels, dtype=np.int64).reshape(-1)
    if preds.shape != labels.shape:
        raise DataError(f"{preds.size} predictions but {labels.size} labels")
    for what, arr in (("prediction", preds), ("label", labels)):
        bad = np.flatnonzero((arr < 0) | (arr >= C))
        if bad.size:
            raise DataError(f"{what} {int(arr[bad[0]])} at index {int(bad[0])} is outside [0, {C})")
    counts = np.zeros((C, C), dtype=np.int64)
    np.add.at(counts, (labels, preds), 1)
    return ConfusionMatrix(counts)


def per_class_recall(cm: ConfusionMatrix) -> list[float | None]:
    """Recall per true class; ``None`` for classes with no true samples."""
    support = cm.counts.sum(axis=1)
    diag = np.diag(cm.counts)
    return [float(diag[k] / support[k]) if support[k] else None for k in range(cm.n_classes)]


def war_uar(cm: ConfusionMatrix) -> tuple[float, float]:
    """WAR is overall accuracy; UAR averages recall over classes that occur."""
    n = cm.n
    if n == 0:
        raise DataError("empty confusion matrix")
    war = float(np.trace(cm.counts) / n)
    recalls = [r for r in per_class_recall(cm) if r is not None]
    return war, float(np.mean(recalls))


def metrics_report(preds, labels, C: int, fold: int | None = None, seed: int | None = None) -> MetricsReport:
    cm = confusion(preds, labels, C)
    war, uar = war_uar(cm)
    return MetricsReport(war, uar, per_class_recall(cm), cm.n, cm.tolist(), fold, seed)
