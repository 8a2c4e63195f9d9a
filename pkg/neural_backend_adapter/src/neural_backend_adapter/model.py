"""A small causal transformer language model.

Pre-norm residual blocks wrap multi-head self attention and a GELU MLP;
token and position embeddings are learned, and an untied linear head
projects back to the vocabulary.  The forward pass returns raw logits.
Losses taken from them with ``torch.nn.functional.cross_entropy`` are in
natural log units, so they line up with the measurement toolkit's nats
per token.
"""

from __future__ import annotations

from dataclasses import dataclass, fields

import torch
import torch.nn.functional as F
from torch import nn


@dataclass(frozen=True)
class ModelConfig:
    """Architecture and optimization settings.

    The defaults describe the full-scale regime this backend was built
    around: a 50257-entry vocabulary cap over 512-token sequences, six
    residual blocks of width 512 with 8 attention heads, and Adam at a
    flat 2e-4 on batches of 12 windows (24 on larger corpora).  Training
    stops once dev loss has gone more than 15 consecutive validation
    runs without improving.  Every field can be scaled down for smoke
    runs on small corpora.
    """

    vocab_size: int = 50257  # cap; the built vocabulary may be smaller
    seq_len: int = 512
    hidden: int = 512
    blocks: int = 6
    heads: int = 8
    dropout: float = 0.0
    learning_rate: float = 2e-4  # held flat for the whole run
    batch_size: int = 12
    patience: int = 15  # non-improving dev evals tolerated before stopping
    max_epochs: int = 100

    def __post_init__(self) -> None:
        for name in ("vocab_size", "seq_len", "hidden", "blocks", "heads", "batch_size", "max_epochs"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if self.hidden % self.heads:
            raise ValueError(f"hidden ({self.hidden}) must be divisible by heads ({self.heads})")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if not 0.0 <= self.dropout < 1.0:
            raise ValueError("dropout must be in [0, 1)")
        if self.patience < 0:
            raise ValueError("patience must be >= 0")

    @classmethod
    def from_dict(cls, d: dict) -> "ModelConfig":
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(d) - known)
        if unknown:
            raise ValueError(f"unknown model config keys: {', '.join(unknown)}")
        return cls(**d)

    def to_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    def backend_id(self) -> str:
        return f"transformer-h{self.hidden}x{self.blocks}"


class CausalSelfAttention(nn.Module):
    def __init__(self, config: ModelConfig):
        super().__init__()
        self.heads = config.heads
        self.qkv = nn.Linear(config.hidden, 3 * config.hidden)
        self.proj = nn.Linear(config.hidden, config.hidden)
        self.drop = nn.Dropout(config.dropout)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        b, t, h = x.shape
        q, k, v = self.qkv(x).chunk(3, dim=-1)

        def split(m: torch.Tensor) -> torch.Tensor:
            return m.view(b, t, self.heads, h // self.heads).transpose(1, 2)

        out = F.scaled_dot_product_attention(split(q), split(k), split(v), is_causal=True)
        out = out.transpose(1, 2).reshape(b, t, h)
        return self.drop(self.proj(out))


class Block(nn.Module):
    """One pre-norm residual block: attention, then a 4x GELU MLP."""

    def __init__(self, config: ModelConfig):
        super().__init__()
        self.norm1 = nn.LayerNorm(config.hidden)
        self.attn = CausalSelfAttention(config)
        self.norm2 = nn.LayerNorm(config.hidden)
        self.mlp = nn.Sequential(
            nn.Linear(config.hidden, 4 * config.hidden),
            nn.GELU(),
            nn.Linear(4 * config.hidden, config.hidden),
            nn.Dropout(config.dropout),
        )

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        x = x + self.attn(self.norm1(x))
        return x + self.mlp(self.norm2(x))


class TransformerLM(nn.Module):
    def __init__(self, config: ModelConfig):
        super().__init__()
        self.config = config
        self.token_embedding = nn.Embedding(config.vocab_size, config.hidden)
        self.position_embedding = nn.Embedding(config.seq_len, config.hidden)
        self.drop = nn.Dropout(config.dropout)
        self.stack = nn.ModuleList(Block(config) for _ in range(config.blocks))
        self.final_norm = nn.LayerNorm(config.hidden)
        self.head = nn.Linear(config.hidden, config.vocab_size, bias=False)

    def forward(self, ids: torch.Tensor) -> torch.Tensor:
        """Map (batch, time) token ids to (batch, time, vocab) logits."""
        _, t = ids.shape
        if t > self.config.seq_len:
            raise ValueError(f"sequence of {t} tokens exceeds seq_len {self.config.seq_len}")
        positions = torch.arange(t, device=ids.device)
        x = self.drop(self.token_embedding(ids) + self.position_embedding(positions))
        for block in self.stack:
            x = block(x)
        return self.head(self.final_norm(x))

    def parameter_count(self) -> int:
        return sum(p.numel() for p in self.parameters())
