"""Entry point speaking the external training backend protocol.

Invocation, as issued by the calling toolkit:

    neural-backend-adapter --train T --dev D --test P1 [--test P2 ...]
        --out OUT --seed N --config CFG

Token files are whitespace separated.  CFG is the job description JSON;
its "test_periods" list names the --test files in order, and an
optional "model" object overrides ModelConfig fields.  A --model-config
JSON file, for callers that cannot edit the job config, wins over both.
OUT receives the result object the toolkit validates, holding the
echoed job identity plus one loss row per test file and the best dev
loss.  Any failure to train or evaluate exits nonzero so the caller
records the job as failed.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .model import ModelConfig
from .training import evaluate_loss, train_model


def _read_tokens(path: str) -> list[str]:
    return Path(path).read_text(encoding="utf-8").split()


def resolve_model_config(cfg: dict, override_path: str | None = None) -> ModelConfig:
    """Defaults, updated by the job config's "model" object, then the override file."""
    merged = dict(cfg.get("model", {}))
    if override_path:
        merged.update(json.loads(Path(override_path).read_text(encoding="utf-8")))
    return ModelConfig.from_dict(merged)


def _run(args: argparse.Namespace) -> int:
    cfg = json.loads(Path(args.config).read_text(encoding="utf-8"))
    test_periods = cfg.get("test_periods", [])
    if len(test_periods) != len(args.tests):
        print(
            f"config lists {len(test_periods)} test_periods but got {len(args.tests)} --test flags",
            file=sys.stderr,
        )
        return 1

    model_cfg = resolve_model_config(cfg, args.model_config)
    train = _read_tokens(args.train)
    outcome = train_model(train, _read_tokens(args.dev), model_cfg, seed=args.seed)

    results = []
    for period, path in zip(test_periods, args.tests):
        tokens = _read_tokens(path)
        results.append(
            {
                "test_period": period,
                "loss_nats_per_token": evaluate_loss(outcome.model, outcome.vocab, tokens),
                "token_count": len(tokens),
            }
        )
    payload = {
        "job": {
            "topic": cfg.get("topic", ""),
            "train_period": cfg.get("train_period", ""),
            "subset_size": int(cfg.get("subset_size", len(train))),
            "backend_id": cfg.get("backend_id", model_cfg.backend_id()),
            "seed": args.seed,
        },
        "results": results,
        "dev_loss": outcome.dev_loss,
    }
    Path(args.out).write_text(json.dumps(payload, indent=2), encoding="utf-8")
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="neural-backend-adapter")
    parser.add_argument("--train", required=True)
    parser.add_argument("--dev", required=True)
    parser.add_argument("--test", action="append", default=[], dest="tests")
    parser.add_argument("--out", required=True)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--config", required=True)
    parser.add_argument(
        "--model-config",
        default=None,
        help="JSON file of ModelConfig overrides; wins over the job config",
    )
    args = parser.parse_args(argv)
    try:
        return _run(args)
    except Exception as exc:  # any failure must come back as a nonzero exit
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
