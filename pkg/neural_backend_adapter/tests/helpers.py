"""Shared test fixtures: a learnable token stream and a scaled-down model."""

from __future__ import annotations

import random

from neural_backend_adapter import ModelConfig

TINY = dict(
    seq_len=32,
    hidden=32,
    blocks=2,
    heads=2,
    batch_size=8,
    learning_rate=3e-3,
    max_epochs=30,
    patience=3,
)


def tiny_config(**overrides) -> ModelConfig:
    return ModelConfig(**{**TINY, **overrides})


def markov_tokens(n: int, seed: int, vocab: int = 12, stickiness: float = 0.75) -> list[str]:
    """Stream where each token usually follows its cyclic successor.

    The predictable structure gives a model something to learn while a
    fresh seed keeps splits disjoint.
    """
    rng = random.Random(seed)
    words = [f"w{i:02d}" for i in range(vocab)]
    state = 0
    out = []
    for _ in range(n):
        state = (state + 1) % vocab if rng.random() < stickiness else rng.randrange(vocab)
        out.append(words[state])
    return out


def write_tokens(path, tokens) -> None:
    path.write_text(" ".join(tokens), encoding="utf-8")
