"""Directory-sequence language model."""

from .model import (HyperParams, LanguageModel, UnknownWord, embedding_similarity, forward_distribution,
                    predict_topk)
from .train import (DESK_GRID, FULL_GRID, EmptyTrainingSet, TrainingReport, expand_grid, fit, gradcheck_case, gradient_check,
                    grid_search, train)
from .vocab import EOS, PAD, SOS, SPECIALS, UNK, Vocabulary, build_vocabulary, encode

__all__ = [
    "HyperParams", "LanguageModel", "UnknownWord", "embedding_similarity", "forward_distribution", "predict_topk",
    "DESK_GRID", "FULL_GRID", "EmptyTrainingSet", "TrainingReport", "expand_grid", "fit", "gradcheck_case", "gradient_check",
    "grid_search", "train", "EOS", "PAD", "SOS", "SPECIALS", "UNK", "Vocabulary", "build_vocabulary", "encode",
]
