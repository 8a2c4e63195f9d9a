"""Transformer language model backend for the perishability toolkit.

The toolkit launches one process per training job through its external
backend protocol; this package is such a backend.  Each process builds a
vocabulary from the training split, trains a small causal transformer
with dev-driven early stopping, scores the test splits, and writes
losses as JSON for the toolkit to validate.  The library half
(ModelConfig, train_model, evaluate_loss) also works standalone.
"""

from .adapter import main, resolve_model_config
from .data import BOS, UNK, Vocab, shifted_windows
from .model import ModelConfig, TransformerLM
from .training import IGNORE, TrainResult, evaluate_loss, train_model

__all__ = [
    "BOS",
    "IGNORE",
    "ModelConfig",
    "TrainResult",
    "TransformerLM",
    "UNK",
    "Vocab",
    "evaluate_loss",
    "main",
    "resolve_model_config",
    "shifted_windows",
    "train_model",
]
