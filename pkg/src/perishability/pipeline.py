"""Orchestration: corpus in, decay report out.

The CLI wraps these steps with files between them; tests and notebooks
can call them in memory.  A workspace directory looks like

    documents.jsonl                    parsed, filtered documents
    slices/<topic>/<period>/train.txt  split token files
                            dev.txt
                            test.txt
                            meta.json  counts, seed, ladder sizes, config hash
    manifest.jsonl                     evaluation records, append only
    curves.json, effectiveness/, decay.json, ...
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from .backend import (
    EvalRecord,
    Manifest,
    NGramModel,
    TrainJob,
    evaluate,
    ngram_train,
    run_external_backend,
)
from .config import RunConfig
from .corpus import (
    Document,
    PeriodSlice,
    SubsetLadder,
    build_subset_ladder,
    filter_min_score,
    make_splits,
    slice_periods,
)
from .curves import (
    EffectivenessSeries,
    LearningCurveFit,
    build_effectiveness_series,
    fit_native_curves,
)
from .decay import DecayFit, fit_exponential_decay
from .errors import DataError, InsufficientDataError
from .synth import DriftProcess, generate_corpus
from .periods import month_range


def document_to_dict(doc: Document) -> dict:
    return dataclasses.asdict(doc)


def document_from_dict(d: dict) -> Document:
    return Document(**d)


def prepare_documents(docs: Iterable[Document], cfg: RunConfig) -> list[Document]:
    """The ingest step: score filtering (parsing happens upstream)."""
    return filter_min_score(docs, cfg.min_score)


def slice_topic(
    docs: Sequence[Document], cfg: RunConfig, topic: str | None = None
) -> dict[str, PeriodSlice]:
    """Period splits for one topic, sufficient periods only."""
    if topic is not None:
        docs = [d for d in docs if d.topic == topic]
    if not docs:
        raise InsufficientDataError(f"no documents for topic {topic!r}")
    buckets = slice_periods(docs, min_words=cfg.period_min_words)
    slices: dict[str, PeriodSlice] = {}
    for pid, bucket in buckets.items():
        if bucket.insufficient:
            continue
        slices[pid] = make_splits(
            bucket.documents,
            dev_min=cfg.dev_min_words,
            test_min=cfg.test_min_words,
            seed=cfg.seed,
            train_min=cfg.ladder_top,
            period_id=pid,
        )
    if not slices:
        raise InsufficientDataError(
            f"every period is under the {cfg.period_min_words}-word floor"
        )
    return slices


def ladder_for(sl: PeriodSlice, cfg: RunConfig) -> SubsetLadder:
    return build_subset_ladder(
        sl.train_full, cfg.ladder_top, cfg.ladder_floor, period_id=sl.period_id
    )


def pick_reference(slices: dict[str, PeriodSlice], cfg: RunConfig) -> str:
    if cfg.reference_period is not None:
        if cfg.reference_period not in slices:
            raise DataError(
                f"reference period {cfg.reference_period} has no usable slice"
            )
        return cfg.reference_period
    return min(slices)


def train_topic(
    slices: dict[str, PeriodSlice],
    cfg: RunConfig,
    manifest: Manifest | None = None,
    reference_period: str | None = None,
    cross: str = "reference",
) -> list[EvalRecord]:
    """Train the ladder per period and evaluate.

    Every rung is scored on its own period's test split, which feeds the
    native learning curves.  Cross-period evaluation, which feeds the
    effectiveness series, covers the top rung of the reference period
    (``cross="reference"``), of every period (``cross="full"``), or
    nothing (``cross="none"``).
    """
    if cross not in ("reference", "full", "none"):
        raise ValueError(f"unknown cross plan {cross!r}")
    reference = reference_period or pick_reference(slices, cfg)
    backend_id = cfg.ngram.backend_id()
    records: list[EvalRecord] = []

    def emit(rec: EvalRecord) -> None:
        records.append(rec)
        if manifest is not None:
            manifest.append(rec)

    pids = sorted(slices)
    for pid in pids:
        sl = slices[pid]
        ladder = ladder_for(sl, cfg)
        for size, subset in ladder:
            model = ngram_train(subset, sl.dev, cfg.ngram)
            job = TrainJob(
                topic=sl.topic,
                train_period=pid,
                subset_size=size,
                backend_id=backend_id,
                seed=cfg.seed,
            )
            emit(evaluate(model, job, pid, sl.test))
            is_top = size == ladder.sizes[0]
            wants_cross = cross == "full" or (cross == "reference" and pid == reference)
            if is_top and wants_cross and cross != "none":
                for other in pids:
                    if other != pid:
                        emit(evaluate(model, job, other, slices[other].test))
    return records


@dataclass
class TopicAnalysis:
    topic: str
    reference_period: str
    curve_fits: dict[str, LearningCurveFit]
    series: EffectivenessSeries
    decay: DecayFit


def analyze_topic(
    records: Sequence[EvalRecord],
    topic: str,
    cfg: RunConfig,
    reference_period: str | None = None,
) -> TopicAnalysis:
    """Native curves, effectiveness series and decay fit from a manifest."""
    backend_id = cfg.backend_id() if cfg.backend_command else cfg.ngram.backend_id()
    present = {r.job.backend_id for r in records if r.job.topic == topic}
    if backend_id not in present and len(present) == 1:
        backend_id = present.pop()  # manifest written by a differently-tagged backend
    fits = fit_native_curves(records, topic, backend_id)
    if not fits:
        raise DataError(f"no fittable learning curves for topic {topic!r}")
    reference = reference_period or cfg.reference_period or min(fits)
    series = build_effectiveness_series(
        records, topic, reference, fits, backend_id=backend_id
    )
    decay = fit_exponential_decay(
        series,
        intercept=cfg.decay_intercept,
        clip_at_one=cfg.clip_at_one,
        cap=cfg.half_life_cap,
    )
    return TopicAnalysis(
        topic=topic,
        reference_period=reference,
        curve_fits=fits,
        series=series,
        decay=decay,
    )


@dataclass
class SyntheticRun:
    rho: float
    seed: int
    analysis: TopicAnalysis

    @property
    def mu(self) -> float:
        return self.analysis.decay.mu


def run_synthetic_pipeline(
    rho: float,
    seed: int,
    cfg: RunConfig | None = None,
    n_periods: int = 12,
    words_per_period: int = 200_000,
    start_period: str = "2012-01",
    vocab_size: int = 64,
) -> SyntheticRun:
    """Generate a drifting corpus and push it through the whole pipeline."""
    cfg = cfg or RunConfig()
    process = DriftProcess.random(vocab_size, rho, seed)
    periods = month_range(start_period, n_periods)
    docs = generate_corpus(process, periods, words_per_period)
    docs = prepare_documents(docs, cfg)
    slices = slice_topic(docs, cfg)
    reference = pick_reference(slices, cfg)
    records = train_topic(slices, cfg, reference_period=reference)
    analysis = analyze_topic(records, process.topic, cfg, reference_period=reference)
    return SyntheticRun(rho=rho, seed=seed, analysis=analysis)


# -- workspace file helpers ----------------------------------------------


def write_documents(docs: Iterable[Document], path: Path) -> int:
    count = 0
    with open(path, "w", encoding="utf-8") as fh:
        for doc in docs:
            fh.write(json.dumps(document_to_dict(doc), sort_keys=True) + "\n")
            count += 1
    return count


def read_documents(path: Path) -> list[Document]:
    docs = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                docs.append(document_from_dict(json.loads(line)))
    return docs


def slice_dir(workspace: Path, topic: str, period: str) -> Path:
    return workspace / "slices" / topic / period


def write_slice(workspace: Path, sl: PeriodSlice, cfg: RunConfig) -> Path:
    d = slice_dir(workspace, sl.topic, sl.period_id)
    d.mkdir(parents=True, exist_ok=True)
    (d / "train.txt").write_text(" ".join(sl.train_full), encoding="utf-8")
    (d / "dev.txt").write_text(" ".join(sl.dev), encoding="utf-8")
    (d / "test.txt").write_text(" ".join(sl.test), encoding="utf-8")
    meta = {
        "topic": sl.topic,
        "period_id": sl.period_id,
        "seed": sl.seed,
        "word_counts": sl.word_counts,
        "posts": {
            "train": len(sl.train_post_ids),
            "dev": len(sl.dev_post_ids),
            "test": len(sl.test_post_ids),
        },
        "config_hash": cfg.hash(),
    }
    (d / "slice.json").write_text(
        json.dumps(meta, indent=2, sort_keys=True), encoding="utf-8"
    )
    return d


def list_slices(workspace: Path) -> dict[str, list[str]]:
    """Topics and their sliced periods present in a workspace."""
    root = workspace / "slices"
    if not root.is_dir():
        return {}
    out: dict[str, list[str]] = {}
    for topic_dir in sorted(root.iterdir()):
        if topic_dir.is_dir():
            periods = sorted(
                p.name for p in topic_dir.iterdir() if (p / "train.txt").exists()
            )
            if periods:
                out[topic_dir.name] = periods
    return out


def read_slice_tokens(workspace: Path, topic: str, period: str) -> PeriodSlice:
    d = slice_dir(workspace, topic, period)
    if not (d / "train.txt").exists():
        raise DataError(
            f"no slice for {topic}/{period}; run the slice subcommand first"
        )
    meta = json.loads((d / "slice.json").read_text(encoding="utf-8"))
    return PeriodSlice(
        topic=topic,
        period_id=period,
        train_full=(d / "train.txt").read_text(encoding="utf-8").split(),
        dev=(d / "dev.txt").read_text(encoding="utf-8").split(),
        test=(d / "test.txt").read_text(encoding="utf-8").split(),
        seed=meta.get("seed", 0),
    )


def write_ladder(workspace: Path, topic: str, period: str, sizes: list[int], cfg: RunConfig) -> None:
    path = slice_dir(workspace, topic, period) / "slice.json"
    meta = json.loads(path.read_text(encoding="utf-8")) if path.exists() else {}
    meta["ladder_sizes"] = sizes
    meta["config_hash"] = cfg.hash()
    path.write_text(json.dumps(meta, indent=2, sort_keys=True), encoding="utf-8")


def read_ladder_sizes(workspace: Path, topic: str, period: str) -> list[int]:
    path = slice_dir(workspace, topic, period) / "slice.json"
    if not path.exists():
        raise DataError(
            f"no slice for {topic}/{period}; run the slice subcommand first"
        )
    meta = json.loads(path.read_text(encoding="utf-8"))
    if "ladder_sizes" not in meta:
        raise DataError(
            f"no ladder for {topic}/{period}; run the ladder subcommand first"
        )
    return list(meta["ladder_sizes"])


def train_topic_external(
    workspace: Path,
    topic: str,
    cfg: RunConfig,
    manifest: Manifest,
    reference_period: str | None = None,
    cross: str = "reference",
) -> tuple[int, int]:
    """Drive an external backend over a sliced workspace topic.

    Returns (ok_jobs, failed_jobs).  Failures land in the manifest and do
    not stop the sweep.
    """
    layout = list_slices(workspace)
    if topic not in layout:
        raise DataError(f"topic {topic!r} is not sliced in {workspace}")
    periods = layout[topic]
    reference = reference_period or cfg.reference_period or min(periods)
    command = cfg.backend_command
    if not command:
        raise ValueError("config has no backend_command")
    backend_id = cfg.backend_id()
    run_dir = workspace / "backend_runs" / topic
    run_dir.mkdir(parents=True, exist_ok=True)
    ok = failed = 0
    for pid in periods:
        d = slice_dir(workspace, topic, pid)
        sizes = read_ladder_sizes(workspace, topic, pid)
        train_tokens = (d / "train.txt").read_text(encoding="utf-8").split()
        is_reference = pid == reference
        for size in sizes:
            subset_path = run_dir / f"{pid}-{size}.train.txt"
            subset_path.write_text(" ".join(train_tokens[:size]), encoding="utf-8")
            test_paths: dict[str, Path] = {pid: d / "test.txt"}
            is_top = size == sizes[0]
            if is_top and cross != "none" and (cross == "full" or is_reference):
                for other in periods:
                    if other != pid:
                        test_paths[other] = slice_dir(workspace, topic, other) / "test.txt"
            job = TrainJob(
                topic=topic,
                train_period=pid,
                subset_size=size,
                backend_id=backend_id,
                seed=cfg.seed,
            )
            result = run_external_backend(
                command,
                job,
                train_path=subset_path,
                dev_path=d / "dev.txt",
                test_paths=test_paths,
                out_path=run_dir / f"{pid}-{size}.result.json",
            )
            if result.failed:
                failed += 1
                manifest.append_failure(job, result.error or "unknown failure")
                continue
            ok += 1
            for rec in result.records:
                manifest.append(rec)
    return ok, failed
