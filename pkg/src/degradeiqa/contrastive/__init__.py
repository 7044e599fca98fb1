"""Contrastive training pieces: batches, loss, desk-scale encoder, projector, retrieval."""

from .batch import BLOCKS, TrainingBatch, batch_layout, build_training_batch
from .embeddings import read_embeddings_csv, write_embeddings_csv
from .features import FEATURE_DIM, FEATURE_NAMES, batch_features, handcrafted_features
from .loss import cosine_similarity, nt_xent_arniqa, nt_xent_gradient, positive_index
from .projector import Projector, fit_standardizer, train_projector
from .retrieval import chance_level, retrieval_accuracy

__all__ = [
    "BLOCKS",
    "FEATURE_DIM",
    "FEATURE_NAMES",
    "Projector",
    "TrainingBatch",
    "batch_features",
    "batch_layout",
    "build_training_batch",
    "chance_level",
    "cosine_similarity",
    "fit_standardizer",
    "handcrafted_features",
    "nt_xent_arniqa",
    "nt_xent_gradient",
    "positive_index",
    "read_embeddings_csv",
    "retrieval_accuracy",
    "train_projector",
    "write_embeddings_csv",
]
