"""Entity-embedding and transformer classifiers over encoded tables."""

from tabembed.models.architectures import (
    Classifier,
    ContextConfig,
    ContextModel,
    EntityConfig,
    EntityModel,
    build_context,
    build_context_from_config,
    build_entity,
    build_entity_from_config,
    build_model,
    context_config,
    embedding_dim,
    entity_config,
    reduced_width,
    seed_stream,
)
from tabembed.models.metrics import F1Result, binary_f1, f1_score, macro_f1
from tabembed.models.training import TrainReport, evaluate, fit

__all__ = [
    "Classifier",
    "ContextConfig",
    "ContextModel",
    "EntityConfig",
    "EntityModel",
    "F1Result",
    "TrainReport",
    "binary_f1",
    "build_context",
    "build_context_from_config",
    "build_entity",
    "build_entity_from_config",
    "build_model",
    "context_config",
    "embedding_dim",
    "entity_config",
    "evaluate",
    "f1_score",
    "fit",
    "macro_f1",
    "reduced_width",
    "seed_stream",
]
