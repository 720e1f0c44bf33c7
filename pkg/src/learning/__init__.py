"""Local learning: models, datasets and update arithmetic."""

from .data import (
    Dataset,
    draw_batch,
    load_idx,
    partition_iid,
    synth_blobs,
    write_csv,
    write_idx,
)
from .models import (
    MLP,
    LogisticRegression,
    Model,
    ModelParams,
    build_model,
    evaluate_accuracy,
    gradient,
)
from .updates import (
    LearningConfig,
    aggregate_update,
    clip_gradient,
    learning_rate,
    local_update,
)

__all__ = [
    "Dataset",
    "LearningConfig",
    "LogisticRegression",
    "MLP",
    "Model",
    "ModelParams",
    "aggregate_update",
    "build_model",
    "clip_gradient",
    "draw_batch",
    "evaluate_accuracy",
    "gradient",
    "learning_rate",
    "load_idx",
    "local_update",
    "partition_iid",
    "synth_blobs",
    "write_csv",
    "write_idx",
]
