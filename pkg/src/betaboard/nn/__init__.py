"""Minimal dense-tensor numerical core (float64 numpy throughout).

Forward/backward passes for the layers the sequence models need, plus
cross-entropy, Adam, sinusoidal embeddings, finite-difference gradient
checking, and checkpoint I/O.
"""

from .ops import (
    attention_backward,
    attention_forward,
    embedding_backward,
    embedding_forward,
    gru_cell_backward,
    gru_cell_forward,
    layer_norm_backward,
    layer_norm_forward,
    linear_backward,
    linear_forward,
    log_softmax,
    relu_backward,
    relu_forward,
    sinusoidal_embedding,
    softmax,
    softmax_cross_entropy,
)
from .params import ParamStore, adam_step, uniform_init
from .gradcheck import grad_check
from .checkpoint import load_checkpoint, save_checkpoint

__all__ = [
    "ParamStore",
    "adam_step",
    "attention_backward",
    "attention_forward",
    "embedding_backward",
    "embedding_forward",
    "grad_check",
    "gru_cell_backward",
    "gru_cell_forward",
    "layer_norm_backward",
    "layer_norm_forward",
    "linear_backward",
    "linear_forward",
    "load_checkpoint",
    "log_softmax",
    "relu_backward",
    "relu_forward",
    "save_checkpoint",
    "sinusoidal_embedding",
    "softmax",
    "softmax_cross_entropy",
    "uniform_init",
]
