"""Metrics, evaluation protocols, ablation runner, reports and the CLI."""

from .metrics import ConfusionMatrix, MetricsReport, confusion, metrics_report, per_class_recall, war_uar
from .protocol import holdout_split, kfold_protocol, split
from .report import ReportFormat, emit_report, load_records, render

# The ablation runner depends on ``train``, which itself imports ``metrics``;
# load it lazily so importing ``train`` first does not cycle.
_LAZY = {"AblationSpec", "Axis", "PRESETS", "preset", "run_ablation"}


def __getattr__(name):
    if name in _LAZY:
        from . import ablation

        return getattr(ablation, name)
    raise AttributeError(f"module {__name__!r} has no attribute {name!r}")


__all__ = [
    "AblationSpec",
    "Axis",
    "ConfusionMatrix",
    "MetricsReport",
    "PRESETS",
    "ReportFormat",
    "confusion",
    "emit_report",
    "holdout_split",
    "kfold_protocol",
    "load_records",
    "metrics_report",
    "per_class_recall",
    "preset",
    "render",
    "run_ablation",
    "split",
    "war_uar",
]
