from .tasks import MODE_NAMES, TaskKind, TaskMode, TaskPrediction
from .model import (
    HierarchicalModel,
    PairEntry,
    PairPrediction,
    predict_pairs,
    predict_task,
    predict_task_vector,
)
from .train import TECHNIQUE_SPLITS, TrainOptions, train_hierarchical

__all__ = [
    "MODE_NAMES",
    "TaskKind",
    "TaskMode",
    "TaskPrediction",
    "HierarchicalModel",
    "PairEntry",
    "PairPrediction",
    "predict_pairs",
    "predict_task",
    "predict_task_vector",
    "TECHNIQUE_SPLITS",
    "TrainOptions",
    "train_hierarchical",
]
