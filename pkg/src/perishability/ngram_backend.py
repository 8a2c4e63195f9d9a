"""The built-in n-gram model exposed as an external-protocol backend.

Lets the subprocess protocol be exercised against a backend whose results
must match in-process training exactly.  Config JSON may carry an "ngram"
object with NGramConfig fields.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .backend import NGramConfig, ngram_train


def _read_tokens(path: str) -> list[str]:
    return Path(path).read_text(encoding="utf-8").split()


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="perishability-ngram-backend")
    parser.add_argument("--train", required=True)
    parser.add_argument("--dev", required=True)
    parser.add_argument("--test", action="append", default=[], dest="tests")
    parser.add_argument("--out", required=True)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--config", required=True)
    args = parser.parse_args(argv)

    cfg = json.loads(Path(args.config).read_text(encoding="utf-8"))
    test_periods = cfg.get("test_periods", [])
    if len(test_periods) != len(args.tests):
        print(
            f"config lists {len(test_periods)} test_periods but got {len(args.tests)} --test flags",
            file=sys.stderr,
        )
        return 1

    ngram_cfg = NGramConfig(**cfg.get("ngram", {}))
    train = _read_tokens(args.train)
    model = ngram_train(train, _read_tokens(args.dev), ngram_cfg)

    results = []
    for period, path in zip(test_periods, args.tests):
        tokens = _read_tokens(path)
        results.append(
            {
                "test_period": period,
                "loss_nats_per_token": model.cross_entropy(tokens),
                "token_count": len(tokens),
            }
        )
    payload = {
        "job": {
            "topic": cfg.get("topic", ""),
            "train_period": cfg.get("train_period", ""),
            "subset_size": int(cfg.get("subset_size", len(train))),
            "backend_id": cfg.get("backend_id", ngram_cfg.backend_id()),
            "seed": args.seed,
        },
        "results": results,
        "dev_loss": model.dev_loss,
    }
    Path(args.out).write_text(json.dumps(payload, indent=2), encoding="utf-8")
    return 0


if __name__ == "__main__":
    sys.exit(main())
