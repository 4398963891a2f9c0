"""Event-location linking: given a sentence's linguistic annotations and
an event verb, predict which tokens name where the event occurred."""

__version__ = "0.1.0"

from .corpus import (AnnotatedSentence, Corpus, EventAnnotation, LabelVector,
                     Token, generate_synthetic, load_corpus, save_corpus,
                     split_corpus, validate_sentence)
from .features import (EmbeddingTable, FeatureConfig, TagInventory,
                       build_inventories, featurize, load_embeddings)
from .baseline import link_nearest
from .models import (LinkerModel, TrainConfig, TrainHistory, build_bilstm,
                     build_cnn, load_checkpoint, predict, save_checkpoint, train)
from .evaluation import (EvaluationResult, SentenceMetrics, TokenMetrics,
                         aggregate, evaluate_model, run_ablation,
                         sentence_exact, token_prf)

__all__ = [
    "AnnotatedSentence", "Corpus", "EventAnnotation", "LabelVector", "Token",
    "generate_synthetic", "load_corpus", "save_corpus", "split_corpus",
    "validate_sentence", "EmbeddingTable", "FeatureConfig", "TagInventory",
    "build_inventories", "featurize", "load_embeddings", "link_nearest",
    "LinkerModel", "TrainConfig", "TrainHistory", "build_bilstm", "build_cnn",
    "load_checkpoint", "predict", "save_checkpoint", "train",
    "EvaluationResult", "SentenceMetrics", "TokenMetrics", "aggregate",
    "evaluate_model", "run_ablation", "sentence_exact", "token_prf",
]
