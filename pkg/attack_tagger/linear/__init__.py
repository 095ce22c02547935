from .model import (
    Hyperparams,
    LinearModel,
    RankedPrediction,
    TrainingMeta,
    decision_scores,
    predict_top_n,
    rank,
)
from .sgd import learning_rate, sgd_step, train_multiclass, training_fingerprint

__all__ = [
    "Hyperparams",
    "LinearModel",
    "RankedPrediction",
    "TrainingMeta",
    "decision_scores",
    "learning_rate",
    "predict_top_n",
    "rank",
    "sgd_step",
    "train_multiclass",
    "training_fingerprint",
]
