from .groups import ParamGroups, partition_parameters
from .schedule import lr_at_epoch
from .trainer import SGD, RunRecord, TrainConfig, evaluate, fit, make_batch, summarize, train_one, train_step

__all__ = [
    "SGD",
    "ParamGroups",
    "RunRecord",
    "TrainConfig",
    "evaluate",
    "fit",
    "lr_at_epoch",
    "make_batch",
    "partition_parameters",
    "summarize",
    "train_one",
    "train_step",
]
