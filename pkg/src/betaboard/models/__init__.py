"""The three hold-ordering architectures and their training loops."""

from .transformer import ARTransformer, ARTConfig, SimpleTransformer, SimpleConfig
from .seq2seq import Seq2Seq, Seq2SeqConfig, perplexity, perplexity_from_probs, seq2seq_train
from .training import TrainConfig, TrainingDiverged, token_accuracy, train_loop

__all__ = [
    "ARTransformer",
    "ARTConfig",
    "Seq2Seq",
    "Seq2SeqConfig",
    "SimpleTransformer",
    "SimpleConfig",
    "TrainConfig",
    "TrainingDiverged",
    "perplexity",
    "perplexity_from_probs",
    "seq2seq_train",
    "token_accuracy",
    "train_loop",
]
