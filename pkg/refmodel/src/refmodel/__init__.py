"""Reference in-context model for attributed-graph dataset containers."""

from .config import MAX_SUPPORTED_CLASSES, ModelConfig, TrainConfig
from .container_reader import (
    CsrGraph,
    DatasetRecord,
    EpisodeRecord,
    list_containers,
    read_gpfn,
)
from .errors import ContainerFormatError, DataError, RefModelError, ShapeError
from .eval import evaluate_icl, majority_baseline, predict_queries
from .losses import joint_loss
from .model import (
    Block,
    FeedForward,
    MaskedAttention,
    RefModel,
    Residual,
    TokenGrid,
    adjacency_mask,
    pfn_mask,
)
from .train import (
    load_training_data,
    model_from_checkpoint,
    train,
    train_step,
    warmup_lr,
)

__all__ = [
    "MAX_SUPPORTED_CLASSES",
    "Block",
    "ContainerFormatError",
    "CsrGraph",
    "DataError",
    "DatasetRecord",
    "EpisodeRecord",
    "FeedForward",
    "MaskedAttention",
    "ModelConfig",
    "RefModel",
    "RefModelError",
    "Residual",
    "ShapeError",
    "TokenGrid",
    "TrainConfig",
    "adjacency_mask",
    "evaluate_icl",
    "joint_loss",
    "list_containers",
    "load_training_data",
    "majority_baseline",
    "model_from_checkpoint",
    "pfn_mask",
    "predict_queries",
    "read_gpfn",
    "train",
    "train_step",
    "warmup_lr",
]

__version__ = "0.1.0"
