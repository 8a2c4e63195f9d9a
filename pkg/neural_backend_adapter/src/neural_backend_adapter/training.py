"""Seeded training with dev-driven early stopping.

One epoch is a full pass over the training windows in a shuffled order.
After every epoch the model is scored on the dev split.  Training ends
at the epoch cap, or sooner once dev loss has gone more than
``patience`` consecutive evaluations without improving, and the weights
that scored best are restored before anything is reported.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Sequence

import torch
import torch.nn.functional as F

from .data import Vocab, shifted_windows
from .model import ModelConfig, TransformerLM

IGNORE = -100  # target id for padding positions, skipped by the loss


@dataclass
class TrainResult:
    model: TransformerLM
    vocab: Vocab
    dev_loss: float  # best dev loss seen, nats per token
    history: list[float]  # dev loss after each completed epoch
    stopped_early: bool


def _pad_batch(
    chunk: Sequence[tuple[list[int], list[int]]], seq_len: int
) -> tuple[torch.Tensor, torch.Tensor]:
    x = torch.zeros(len(chunk), seq_len, dtype=torch.long)
    y = torch.full((len(chunk), seq_len), IGNORE, dtype=torch.long)
    for i, (inputs, targets) in enumerate(chunk):
        x[i, : len(inputs)] = torch.tensor(inputs, dtype=torch.long)
        y[i, : len(targets)] = torch.tensor(targets, dtype=torch.long)
    return x, y


@torch.no_grad()
def evaluate_loss(
    model: TransformerLM,
    vocab: Vocab,
    tokens: Sequence[str],
    batch_size: int = 64,
) -> float:
    """Mean negative log likelihood per token, in nats.

    Scores every token of the sequence once, chunked into seq_len
    windows, so the denominator is exactly ``len(tokens)``.
    """
    if not tokens:
        raise ValueError("empty evaluation sequence")
    model.eval()
    seq_len = model.config.seq_len
    windows = shifted_windows(vocab.encode(tokens), vocab.bos_id, seq_len)
    total = 0.0
    for s in range(0, len(windows), batch_size):
        x, y = _pad_batch(windows[s : s + batch_size], seq_len)
        logits = model(x)
        total += float(
            F.cross_entropy(
                logits.view(-1, logits.size(-1)),
                y.view(-1),
                ignore_index=IGNORE,
                reduction="sum",
            )
        )
    return total / len(tokens)


def train_model(
    train_tokens: Sequence[str],
    dev_tokens: Sequence[str],
    config: ModelConfig | None = None,
    seed: int = 0,
) -> TrainResult:
    """Train a transformer on whitespace tokens; deterministic per seed."""
    config = config or ModelConfig()
    if not train_tokens:
        raise ValueError("empty training sequence")
    if not dev_tokens:
        raise ValueError("empty dev sequence")
    torch.manual_seed(seed)
    vocab = Vocab.build(train_tokens, config.vocab_size)
    # the embedding matrix shrinks to the vocabulary actually built
    model = TransformerLM(replace(config, vocab_size=len(vocab)))
    windows = shifted_windows(vocab.encode(train_tokens), vocab.bos_id, config.seq_len)
    optimizer = torch.optim.Adam(model.parameters(), lr=config.learning_rate)
    shuffler = torch.Generator().manual_seed(seed)

    best = math.inf
    best_state: dict | None = None
    bad = 0
    history: list[float] = []
    stopped_early = False
    for _ in range(config.max_epochs):
        model.train()
        order = torch.randperm(len(windows), generator=shuffler).tolist()
        for s in range(0, len(order), config.batch_size):
            x, y = _pad_batch([windows[i] for i in order[s : s + config.batch_size]], config.seq_len)
            logits = model(x)
            loss = F.cross_entropy(
                logits.view(-1, logits.size(-1)), y.view(-1), ignore_index=IGNORE
            )
            optimizer.zero_grad()
            loss.backward()
            optimizer.step()
        dev = evaluate_loss(model, vocab, dev_tokens)
        history.append(dev)
        if dev < best:
            best = dev
            best_state = {k: v.detach().clone() for k, v in model.state_dict().items()}
            bad = 0
        else:
            bad += 1
            if bad > config.patience:
                stopped_early = True
                break
    if best_state is not None:
        model.load_state_dict(best_state)
    return TrainResult(
        model=model,
        vocab=vocab,
        dev_loss=best,
        history=history,
        stopped_early=stopped_early,
    )
