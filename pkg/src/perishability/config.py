"""Run configuration: desk-scale defaults, JSON loading, content hashing.

Every figure the toolkit writes embeds the hash of the configuration that
produced it, so numbers can always be traced to their settings.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

from .backend import NGramConfig


@dataclass
class RunConfig:
    min_score: int = 2
    period_min_words: int = 200_000
    dev_min_words: int = 20_000
    test_min_words: int = 20_000
    ladder_top: int = 160_000
    ladder_floor: int = 5_000
    seed: int = 0
    reference_period: str | None = None  # earliest sufficient period if unset
    decay_intercept: bool = False
    clip_at_one: bool = True
    half_life_cap: float = 100.0
    significance_thresholds: tuple[float, float, float] = (1e-3, 0.01, 0.05)
    backend_command: list[str] | None = None  # None runs the built-in n-gram
    ngram: NGramConfig = field(default_factory=NGramConfig)

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["significance_thresholds"] = list(self.significance_thresholds)
        return d

    @classmethod
    def from_dict(cls, raw: dict) -> "RunConfig":
        data = dict(raw)
        unknown = set(data) - {f.name for f in dataclasses.fields(cls)}
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        if "ngram" in data and isinstance(data["ngram"], dict):
            data["ngram"] = NGramConfig(**data["ngram"])
        if "significance_thresholds" in data:
            data["significance_thresholds"] = tuple(data["significance_thresholds"])
        return cls(**data)

    @classmethod
    def load(cls, path: str | Path) -> "RunConfig":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))

    def hash(self) -> str:
        canon = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canon.encode("utf-8")).hexdigest()[:16]

    def backend_id(self) -> str:
        if self.backend_command:
            return f"ext:{Path(self.backend_command[0]).name}"
        return self.ngram.backend_id()
