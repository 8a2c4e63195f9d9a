"""Whitespace tokens to model ids.

The vocabulary is built from the training split alone.  Two ids are
reserved, <unk> for anything outside the kept set and <bos> to seed the
first prediction; the remaining budget goes to the most frequent
training tokens, ties broken alphabetically so a rebuild is
deterministic.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Sequence

UNK = "<unk>"
BOS = "<bos>"


@dataclass(frozen=True)
class Vocab:
    index: dict[str, int]

    @classmethod
    def build(cls, tokens: Sequence[str], max_size: int) -> "Vocab":
        if max_size < 3:
            raise ValueError("vocab cap must leave room beyond <unk> and <bos>")
        counts = Counter(tokens)
        kept = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))[: max_size - 2]
        index = {UNK: 0, BOS: 1}
        for token, _ in kept:
            index[token] = len(index)
        return cls(index)

    def __len__(self) -> int:
        return len(self.index)

    @property
    def unk_id(self) -> int:
        return self.index[UNK]

    @property
    def bos_id(self) -> int:
        return self.index[BOS]

    def encode(self, tokens: Sequence[str]) -> list[int]:
        get = self.index.get
        unk = self.index[UNK]
        return [get(t, unk) for t in tokens]


def shifted_windows(
    ids: Sequence[int], bos_id: int, seq_len: int
) -> list[tuple[list[int], list[int]]]:
    """Split an id stream into (input, target) windows of up to seq_len.

    Inputs are the stream shifted right behind <bos>, so every token in
    the stream is a prediction target exactly once.  Windows do not
    overlap and the last one may be short.
    """
    if not ids:
        raise ValueError("empty token sequence")
    inputs = [bos_id] + list(ids[:-1])
    return [
        (inputs[s : s + seq_len], list(ids[s : s + seq_len]))
        for s in range(0, len(ids), seq_len)
    ]
