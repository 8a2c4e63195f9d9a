"""Training and evaluation backends.

The built-in measurement backend is an interpolated n-gram language model:
the probability of a token is a convex mixture of maximum-likelihood
estimates of orders 1..N, with the unigram component add-alpha smoothed so
every token in the vocabulary keeps nonzero probability.  Mixture weights
are tuned on the dev split by expectation-maximization, which is
deterministic here, so a trained model is a pure function of
(train tokens, dev tokens, config).  All losses are natural-log
cross-entropies per token (nats).

External backends are separate executables speaking a small file protocol:

    cmd --train T --dev D --test P1 [--test P2 ...] --out OUT --seed N --config CFG

Train, dev and test files hold whitespace-separated tokens.  CFG is a JSON
file; the key "test_periods" lists period ids aligned with the --test
flags, and backend-specific options ride alongside.  The backend writes
OUT as JSON:

    {"job": {"topic": ..., "train_period": ..., "subset_size": ...,
             "backend_id": ..., "seed": ...},
     "results": [{"test_period": ..., "loss_nats_per_token": ...,
                  "token_count": ...}, ...],
     "dev_loss": ...}

A nonzero exit or malformed OUT marks the job failed; the caller records
the failure and moves on.
"""

from __future__ import annotations

import json
import math
import subprocess
from collections import Counter
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import DataError

UNK = "<unk>"


@dataclass(frozen=True)
class NGramConfig:
    order: int = 4
    vocab_min_count: int = 2  # rarer tokens collapse to <unk>
    unigram_alpha: float = 0.1
    min_unigram_weight: float = 1e-3  # keeps the smoothed floor in the mixture
    em_iterations: int = 50
    em_tol: float = 1e-10
    weight_method: str = "em"

    def backend_id(self) -> str:
        # the tuning method is part of the identity so the manifest records it
        return f"ngram-o{self.order}-{self.weight_method}"


class NGramModel:
    """Interpolated n-gram model over whitespace tokens."""

    def __init__(self, config: NGramConfig | None = None):
        self.config = config or NGramConfig()
        if self.config.order < 1:
            raise ValueError("order must be >= 1")
        self.vocab: dict[str, int] = {}
        self.unigram_probs: np.ndarray | None = None
        self.weights: np.ndarray | None = None
        self.dev_loss: float | None = None
        self._grams: dict[int, dict] = {}  # order -> {gram tuple: count}
        self._ctx_totals: dict[int, dict] = {}  # order -> {context tuple: count}

    # -- training ---------------------------------------------------------

    def fit(self, train_tokens: Sequence[str], dev_tokens: Sequence[str]) -> "NGramModel":
        cfg = self.config
        if not train_tokens:
            raise DataError("empty training sequence")
        if not dev_tokens:
            raise DataError("empty dev sequence")
        counts = Counter(train_tokens)
        kept = sorted(t for t, c in counts.items() if c >= cfg.vocab_min_count)
        self.vocab = {t: i + 1 for i, t in enumerate(kept)}  # id 0 is <unk>
        ids = self._encode(train_tokens)

        vsize = len(self.vocab) + 1
        uni = np.bincount(ids, minlength=vsize).astype(float)
        alpha = cfg.unigram_alpha
        self.unigram_probs = (uni + alpha) / (len(ids) + alpha * vsize)

        self._grams, self._ctx_totals = {}, {}
        for k in range(2, cfg.order + 1):
            grams = Counter(zip(*(ids[i:] for i in range(k))))
            totals: dict = {}
            for gram, c in grams.items():
                ctx = gram[:-1]
                totals[ctx] = totals.get(ctx, 0) + c
            self._grams[k] = dict(grams)
            self._ctx_totals[k] = totals

        dev_ids = self._encode(dev_tokens)
        matrix = self._component_matrix(dev_ids)
        self.weights = self._tune_weights(matrix)
        self.dev_loss = float(-np.log(matrix @ self.weights).mean())
        return self

    def _encode(self, tokens: Sequence[str]) -> list[int]:
        get = self.vocab.get
        return [get(t, 0) for t in tokens]

    def _component_matrix(self, ids: list[int]) -> np.ndarray:
        """Per-position probabilities of each mixture component, shape (n, order).

        Positions too close to the start fall back to the longest context
        actually available, i.e. the next lower order's value.
        """
        n = len(ids)
        order = self.config.order
        m = np.empty((n, order))
        m[:, 0] = self.unigram_probs[np.asarray(ids, dtype=np.intp)]
        for k in range(2, order + 1):
            grams = self._grams[k]
            totals = self._ctx_totals[k]
            gget = grams.get
            tget = totals.get
            col = [0.0] * n
            for t in range(k - 1, n):
                gram = tuple(ids[t - k + 1 : t + 1])
                denom = tget(gram[:-1])
                if denom:
                    col[t] = gget(gram, 0) / denom
            m[:, k - 1] = col
            m[: k - 1, k - 1] = m[: k - 1, k - 2]
        return m

    def _tune_weights(self, matrix: np.ndarray) -> np.ndarray:
        cfg = self.config
        order = cfg.order
        lam = np.full(order, 1.0 / order)
        if cfg.weight_method != "em":
            raise ValueError(f"unknown weight method {cfg.weight_method!r}")
        for _ in range(cfg.em_iterations):
            mix = matrix @ lam  # > 0 thanks to the smoothed unigram floor
            new = lam * (matrix / mix[:, None]).mean(axis=0)
            new /= new.sum()
            if np.abs(new - lam).max() < cfg.em_tol:
                lam = new
                break
            lam = new
        if lam[0] < cfg.min_unigram_weight:
            lam[0] = cfg.min_unigram_weight
            lam /= lam.sum()
        return lam

    # -- evaluation -------------------------------------------------------

    def cross_entropy(self, tokens: Sequence[str]) -> float:
        """Mean negative log probability per token, in nats."""
        if self.weights is None:
            raise ValueError("model is not fitted")
        if not tokens:
            raise DataError("empty evaluation sequence")
        ids = self._encode(tokens)
        matrix = self._component_matrix(ids)
        return float(-np.log(matrix @ self.weights).mean())


def ngram_train(
    train_tokens: Sequence[str],
    dev_tokens: Sequence[str],
    config: NGramConfig | None = None,
) -> NGramModel:
    """Train an interpolated n-gram model, weights tuned on dev."""
    return NGramModel(config).fit(train_tokens, dev_tokens)


# -- records and manifest -------------------------------------------------


@dataclass(frozen=True)
class TrainJob:
    """Identity of one trained model."""

    topic: str
    train_period: str
    subset_size: int
    backend_id: str
    seed: int


@dataclass
class EvalRecord:
    """One model evaluated on one period's test split."""

    job: TrainJob
    test_period: str
    loss_nats_per_token: float
    token_count: int
    dev_loss: float | None = None

    def __post_init__(self) -> None:
        if not math.isfinite(self.loss_nats_per_token) or self.loss_nats_per_token < 0:
            raise DataError(f"bad loss {self.loss_nats_per_token!r}")
        if self.token_count <= 0:
            raise DataError(f"bad token count {self.token_count!r}")

    def to_dict(self) -> dict:
        d = {
            "status": "ok",
            "topic": self.job.topic,
            "train_period": self.job.train_period,
            "subset_size": self.job.subset_size,
            "backend_id": self.job.backend_id,
            "seed": self.job.seed,
            "test_period": self.test_period,
            "loss_nats_per_token": self.loss_nats_per_token,
            "token_count": self.token_count,
        }
        if self.dev_loss is not None:
            d["dev_loss"] = self.dev_loss
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "EvalRecord":
        job = TrainJob(
            topic=d["topic"],
            train_period=d["train_period"],
            subset_size=int(d["subset_size"]),
            backend_id=d["backend_id"],
            seed=int(d["seed"]),
        )
        return cls(
            job=job,
            test_period=d["test_period"],
            loss_nats_per_token=float(d["loss_nats_per_token"]),
            token_count=int(d["token_count"]),
            dev_loss=d.get("dev_loss"),
        )


def evaluate(model: NGramModel, job: TrainJob, test_period: str, tokens: Sequence[str]) -> EvalRecord:
    return EvalRecord(
        job=job,
        test_period=test_period,
        loss_nats_per_token=model.cross_entropy(tokens),
        token_count=len(tokens),
        dev_loss=model.dev_loss,
    )


class Manifest:
    """Append-only JSON-lines store of evaluation records.

    Every append is a single write of one line, so concurrent writers
    interleave whole records.  Failed jobs are recorded too and skipped on
    read unless asked for.
    """

    def __init__(self, path: str | Path):
        self.path = Path(path)

    def append(self, record: EvalRecord) -> None:
        self._write_line(record.to_dict())

    def append_failure(self, job: TrainJob, error: str) -> None:
        self._write_line(
            {
                "status": "failed",
                "topic": job.topic,
                "train_period": job.train_period,
                "subset_size": job.subset_size,
                "backend_id": job.backend_id,
                "seed": job.seed,
                "error": error,
            }
        )

    def _write_line(self, payload: dict) -> None:
        line = json.dumps(payload, sort_keys=True) + "\n"
        with open(self.path, "a", encoding="utf-8") as fh:
            fh.write(line)
            fh.flush()

    def read(self) -> list[EvalRecord]:
        records, _ = self.read_all()
        return records

    def read_all(self) -> tuple[list[EvalRecord], list[dict]]:
        if not self.path.exists():
            return [], []
        records: list[EvalRecord] = []
        failures: list[dict] = []
        with open(self.path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                line = line.strip()
                if not line:
                    continue
                try:
                    payload = json.loads(line)
                except json.JSONDecodeError as exc:
                    raise DataError(f"{self.path}:{lineno}: bad manifest line: {exc}")
                if payload.get("status") == "failed":
                    failures.append(payload)
                else:
                    records.append(EvalRecord.from_dict(payload))
        return records, failures


def best_records(records: Iterable[EvalRecord]) -> dict[tuple, EvalRecord]:
    """Pick the best record per (topic, train period, size, backend, test period).

    Best means lowest dev loss, ties broken by lowest seed, so reruns and
    seed sweeps coexist in one manifest.
    """
    out: dict[tuple, EvalRecord] = {}
    for rec in records:
        key = (
            rec.job.topic,
            rec.job.train_period,
            rec.job.subset_size,
            rec.job.backend_id,
            rec.test_period,
        )
        old = out.get(key)
        if old is None:
            out[key] = rec
            continue
        new_rank = (math.inf if rec.dev_loss is None else rec.dev_loss, rec.job.seed)
        old_rank = (math.inf if old.dev_loss is None else old.dev_loss, old.job.seed)
        if new_rank < old_rank:
            out[key] = rec
    return out


# -- external backend protocol -------------------------------------------


@dataclass
class BackendRunResult:
    job: TrainJob
    records: list[EvalRecord] = field(default_factory=list)
    dev_loss: float | None = None
    failed: bool = False
    error: str | None = None


def validate_backend_result(payload: object) -> list[str]:
    """Check a backend result JSON object; return a list of problems."""
    errors: list[str] = []
    if not isinstance(payload, dict):
        return ["result is not a JSON object"]
    job = payload.get("job")
    if not isinstance(job, dict):
        errors.append("missing or non-object 'job'")
    else:
        for key, typ in (
            ("topic", str),
            ("train_period", str),
            ("subset_size", int),
            ("backend_id", str),
            ("seed", int),
        ):
            if not isinstance(job.get(key), typ):
                errors.append(f"job.{key} missing or not {typ.__name__}")
    results = payload.get("results")
    if not isinstance(results, list) or not results:
        errors.append("missing or empty 'results'")
    else:
        for i, row in enumerate(results):
            if not isinstance(row, dict):
                errors.append(f"results[{i}] is not an object")
                continue
            if not isinstance(row.get("test_period"), str):
                errors.append(f"results[{i}].test_period missing or not str")
            loss = row.get("loss_nats_per_token")
            if not isinstance(loss, (int, float)) or isinstance(loss, bool) or not math.isfinite(loss) or loss < 0:
                errors.append(f"results[{i}].loss_nats_per_token missing or not a finite nonnegative number")
            count = row.get("token_count")
            if not isinstance(count, int) or isinstance(count, bool) or count <= 0:
                errors.append(f"results[{i}].token_count missing or not a positive int")
    dev = payload.get("dev_loss")
    if not isinstance(dev, (int, float)) or isinstance(dev, bool) or not math.isfinite(dev):
        errors.append("missing or non-finite 'dev_loss'")
    return errors


def run_external_backend(
    command: Sequence[str],
    job: TrainJob,
    train_path: str | Path,
    dev_path: str | Path,
    test_paths: dict[str, str | Path],
    out_path: str | Path,
    config: dict | None = None,
    timeout: float | None = None,
) -> BackendRunResult:
    """Run one training job through the external backend protocol.

    ``test_paths`` maps test period ids to token files; the mapping order
    determines the --test flag order and is mirrored to the backend through
    the config key "test_periods".  Protocol violations and nonzero exits
    come back as a failed result instead of raising, so a long sweep can
    note the failure and continue.
    """
    out_path = Path(out_path)
    cfg = dict(config or {})
    cfg.setdefault("topic", job.topic)
    cfg.setdefault("train_period", job.train_period)
    cfg.setdefault("subset_size", job.subset_size)
    cfg.setdefault("backend_id", job.backend_id)
    cfg["test_periods"] = list(test_paths.keys())
    cfg_path = out_path.with_suffix(".config.json")
    cfg_path.write_text(json.dumps(cfg, indent=2, sort_keys=True), encoding="utf-8")

    argv = list(command) + ["--train", str(train_path), "--dev", str(dev_path)]
    for path in test_paths.values():
        argv += ["--test", str(path)]
    argv += ["--out", str(out_path), "--seed", str(job.seed), "--config", str(cfg_path)]

    def failed(msg: str) -> BackendRunResult:
        return BackendRunResult(job=job, failed=True, error=msg)

    try:
        proc = subprocess.run(argv, capture_output=True, text=True, timeout=timeout)
    except (OSError, subprocess.TimeoutExpired) as exc:
        return failed(f"backend did not run: {exc}")
    if proc.returncode != 0:
        tail = proc.stderr.strip().splitlines()[-3:]
        return failed(f"backend exited {proc.returncode}: {' | '.join(tail)}")
    try:
        payload = json.loads(out_path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        return failed(f"backend wrote no usable result: {exc}")
    problems = validate_backend_result(payload)
    if problems:
        return failed("bad backend result: " + "; ".join(problems))
    reported = TrainJob(**payload["job"])
    if reported != job:
        return failed(f"backend reported a different job: {reported}")
    records = [
        EvalRecord(
            job=job,
            test_period=row["test_period"],
            loss_nats_per_token=float(row["loss_nats_per_token"]),
            token_count=int(row["token_count"]),
            dev_loss=float(payload["dev_loss"]),
        )
        for row in payload["results"]
    ]
    return BackendRunResult(job=job, records=records, dev_loss=float(payload["dev_loss"]))
