"""Command-line surface for the pipeline.

Subcommands run the stages in order, with files between them:

    synth          make a drifting corpus (optional, for experiments)
    ingest         parse and filter raw corpus files into a workspace
    slice          cut each topic into monthly train/dev/test splits
    ladder         plan nested training-subset sizes per period
    train          train and evaluate models, appending to the manifest
    curves         fit per-period learning curves from the manifest
    effectiveness  invert cross-period losses into effectiveness series
    decay          fit exponential decay rates per topic
    pairwise       test decay-rate differences between topics
    forms          race exponential against power-law fits
    offload        simulate greedy data off-loading under a fitted rate
    report         emit the summary tables, CSVs and SVG charts

Exit codes: 0 success, 1 usage, 2 data error, 3 fit or saturation error.
Every JSON/CSV/SVG output embeds the active config hash; corpus files
cannot carry comments, so ``synth`` writes the hash to a sidecar
``<out>.meta.json`` instead.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

from . import pipeline
from .backend import Manifest, TrainJob, evaluate, ngram_train
from .config import RunConfig
from .corpus import parse_flat_corpus_file, write_flat_corpus
from .curves import (
    EffectivenessPoint,
    EffectivenessSeries,
    LearningCurveFit,
    build_effectiveness_series,
    fit_native_curves,
)
from .decay import (
    Band,
    DecayFit,
    HalfLife,
    PairwiseFit,
    compare_functional_forms,
    fit_exponential_decay,
    pairwise_decay_difference,
    render_band_matrix,
    render_effectiveness_csv,
    render_rate_table,
)
from .errors import DataError, FitError, PerishabilityError
from .periods import month_index, month_range
from .svg import Series, line_chart
from .synth import DriftProcess, generate_corpus
from .theory import (
    DatasetComposition,
    DriftShift,
    PureExponential,
    SamplingDensity,
    greedy_offload,
    linear_drift,
)


class _Parser(argparse.ArgumentParser):
    """argparse exits 2 on usage errors; the contract reserves 2 for data
    errors, so usage problems are remapped to 1."""

    def error(self, message):  # noqa: A003 - argparse API
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


# -- shared plumbing ------------------------------------------------------


def _load_config(args: argparse.Namespace) -> RunConfig:
    cfg = RunConfig.load(args.config) if args.config else RunConfig()
    if getattr(args, "seed", None) is not None and not isinstance(args.seed, list):
        cfg = dataclasses.replace(cfg, seed=args.seed)
    return cfg


def _workspace(args: argparse.Namespace) -> Path:
    ws = Path(args.workspace)
    ws.mkdir(parents=True, exist_ok=True)
    return ws


def _write_json(path: Path, payload: dict, cfg: RunConfig) -> None:
    payload = {"config_hash": cfg.hash(), **payload}
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _write_csv(path: Path, text: str, cfg: RunConfig) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text + f"# config_hash={cfg.hash()}\n", encoding="utf-8")


def _write_svg(path: Path, svg: str, cfg: RunConfig) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(svg + f"\n<!-- config_hash={cfg.hash()} -->\n", encoding="utf-8")


def _read_artifact(path: Path, missing_hint: str) -> dict:
    if not path.exists():
        raise DataError(f"{path} is missing; run the {missing_hint} subcommand first")
    return json.loads(path.read_text(encoding="utf-8"))


def _documents_path(ws: Path) -> Path:
    return ws / "documents.jsonl"


def _manifest(ws: Path) -> Manifest:
    return Manifest(ws / "manifest.jsonl")


def _series_to_dict(series: EffectivenessSeries) -> dict:
    return {
        "topic": series.topic,
        "train_period": series.train_period,
        "backend_id": series.backend_id,
        "points": [dataclasses.asdict(p) for p in series.points],
        "skipped_periods": series.skipped_periods,
    }


def _series_from_dict(d: dict) -> EffectivenessSeries:
    return EffectivenessSeries(
        topic=d["topic"],
        train_period=d["train_period"],
        backend_id=d["backend_id"],
        points=[EffectivenessPoint(**p) for p in d["points"]],
        skipped_periods=list(d.get("skipped_periods", [])),
    )


def _load_series_files(ws: Path, topics: list[str] | None) -> dict[str, EffectivenessSeries]:
    root = ws / "effectiveness"
    if not root.is_dir():
        raise DataError(
            f"{root} is missing; run the effectiveness subcommand first"
        )
    out = {}
    for path in sorted(root.glob("*.json")):
        series = _series_from_dict(json.loads(path.read_text(encoding="utf-8")))
        if topics is None or series.topic in topics:
            out[series.topic] = series
    if not out:
        raise DataError(
            f"no effectiveness series in {root}"
            + (f" for topics {topics}" if topics else "")
            + "; run the effectiveness subcommand first"
        )
    return out


def _decay_fit_from_dict(topic: str, d: dict) -> DecayFit:
    hl = d["half_life"]
    return DecayFit(
        topic=topic,
        mu=d["mu"],
        stderr=d["stderr"],
        t_stat=d["t_stat"],
        p_value=d["p_value"],
        half_life=HalfLife(hl["years"], hl["display"], hl["censored"]),
        n_points=d["n_points"],
        dropped_points=d["dropped_points"],
        intercept=d["intercept"],
        intercept_used=d["intercept_used"],
    )


def _parse_period_range(text: str) -> tuple[int, int]:
    try:
        start, _, end = text.partition("..")
        return month_index(start), month_index(end or start)
    except Exception as exc:
        raise DataError(f"bad period range {text!r}, expected YYYY-MM..YYYY-MM") from exc


# -- subcommands ----------------------------------------------------------


def cmd_synth(args: argparse.Namespace) -> int:
    cfg = _load_config(args)
    process = DriftProcess.random(
        args.vocab, args.drift, cfg.seed, topic=args.topic
    )
    periods = month_range(args.start, args.periods)
    docs = generate_corpus(process, periods, args.words)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w", encoding="utf-8") as fh:
        write_flat_corpus(docs, fh)
    meta = {
        "config_hash": cfg.hash(),
        "topic": args.topic,
        "drift_per_year": args.drift,
        "vocab": args.vocab,
        "periods": periods,
        "words_per_period": args.words,
        "seed": cfg.seed,
    }
    Path(str(out) + ".meta.json").write_text(
        json.dumps(meta, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    print(f"wrote {len(docs)} documents over {len(periods)} periods to {out}")
    return 0


def cmd_ingest(args: argparse.Namespace) -> int:
    cfg = _load_config(args)
    ws = _workspace(args)
    docs = []
    skipped = 0
    for raw in args.input:
        result = parse_flat_corpus_file(raw)
        docs.extend(result.documents)
        skipped += result.skipped_records
    kept = pipeline.prepare_documents(docs, cfg)
    count = pipeline.write_documents(kept, _documents_path(ws))
    print(
        f"ingested {count} documents "
        f"({len(docs) - len(kept)} under min score {cfg.min_score}, "
        f"{skipped} malformed records skipped)"
    )
    return 0


def cmd_slice(args: argparse.Namespace) -> int:
    cfg = _load_config(args)
    ws = _workspace(args)
    path = _documents_path(ws)
    if not path.exists():
        raise DataError(f"{path} is missing; run the ingest subcommand first")
    docs = pipeline.read_documents(path)
    topics = args.topic or sorted({d.topic for d in docs})
    for topic in topics:
        slices = pipeline.slice_topic(docs, cfg, topic=topic)
        for pid in sorted(slices):
            pipeline.write_slice(ws, slices[pid], cfg)
        print(f"{topic}: {len(slices)} periods sliced ({min(slices)}..{max(slices)})")
    return 0


def cmd_ladder(args: argparse.Namespace) -> int:
    cfg = _load_config(args)
    ws = _workspace(args)
    layout = pipeline.list_slices(ws)
    if not layout:
        raise DataError(f"no slices under {ws}; run the slice subcommand first")
    topics = args.topic or sorted(layout)
    for topic in topics:
        if topic not in layout:
            raise DataError(f"topic {topic!r} is not sliced; run the slice subcommand first")
        for pid in layout[topic]:
            sl = pipeline.read_slice_tokens(ws, topic, pid)
            ladder = pipeline.ladder_for(sl, cfg)
            pipeline.write_ladder(ws, topic, pid, ladder.sizes, cfg)
        print(f"{topic}: ladders planned for {len(layout[topic])} periods")
    return 0


def _train_one_topic(
    ws: Path,
    topic: str,
    periods: list[str],
    cfg: RunConfig,
    manifest: Manifest,
    seeds: list[int],
    cross: str,
) -> int:
    lines = 0
    reference = cfg.reference_period or min(periods)
    for seed in seeds:
        run_cfg = dataclasses.replace(cfg, seed=seed)
        if cfg.backend_command:
            ok, failed = pipeline.train_topic_external(
                ws, topic, run_cfg, manifest, reference_period=reference, cross=cross
            )
            lines += ok + failed
            continue
        slices = {
            pid: pipeline.read_slice_tokens(ws, topic, pid) for pid in periods
        }
        for pid in periods:
            sl = slices[pid]
            sizes = pipeline.read_ladder_sizes(ws, topic, pid)
            for size in sizes:
                model = ngram_train(sl.train_full[:size], sl.dev, run_cfg.ngram)
                job = TrainJob(
                    topic=topic,
                    train_period=pid,
                    subset_size=size,
                    backend_id=run_cfg.ngram.backend_id(),
                    seed=seed,
                )
                manifest.append(evaluate(model, job, pid, sl.test))
                lines += 1
                is_top = size == sizes[0]
                wants_cross = cross == "full" or (
                    cross == "reference" and pid == reference
                )
                if is_top and wants_cross and cross != "none":
                    for other in periods:
                        if other != pid:
                            manifest.append(
                                evaluate(model, job, other, slices[other].test)
                            )
                            lines += 1
    return lines


def cmd_train(args: argparse.Namespace) -> int:
    cfg = _load_config(args)
    if args.backend == "ngram":
        cfg = dataclasses.replace(cfg, backend_command=None)
    elif args.backend == "external" and not cfg.backend_command:
        raise DataError("config has no backend_command for --backend external")
    ws = _workspace(args)
    layout = pipeline.list_slices(ws)
    if not layout:
        raise DataError(f"no slices under {ws}; run the slice subcommand first")
    topics = args.topic or sorted(layout)
    seeds = args.seed if args.seed else [cfg.seed]
    manifest = _manifest(ws)
    if args.jobs > 1:
        print(f"note: single-process execution; --jobs {args.jobs} treated as 1")
    total = 0
    for topic in topics:
        if topic not in layout:
            raise DataError(f"topic {topic!r} is not sliced; run the slice subcommand first")
        periods = layout[topic]
        if args.periods:
            lo, hi = _parse_period_range(args.periods)
            periods = [p for p in periods if lo <= month_index(p) <= hi]
            if not periods:
                raise DataError(
                    f"no sliced periods for {topic!r} in range {args.periods}"
                )
        total += _train_one_topic(ws, topic, periods, cfg, manifest, seeds, args.cross)
    print(f"appended {total} manifest lines to {manifest.path}")
    return 0


def cmd_curves(args: argparse.Namespace) -> int:
    cfg = _load_config(args)
    ws = _workspace(args)
    manifest = _manifest(ws)
    if not manifest.path.exists():
        raise DataError(f"{manifest.path} is missing; run the train subcommand first")
    records = manifest.read()
    if not records:
        raise DataError(f"{manifest.path} has no usable records; run the train subcommand first")
    topics = args.topic or sorted({r.job.topic for r in records})
    payload = {}
    for topic in topics:
        backends = sorted({r.job.backend_id for r in records if r.job.topic == topic})
        per_topic = {}
        for backend_id in backends:
            fits = fit_native_curves(records, topic, backend_id)
            for pid, fit in fits.items():
                per_topic[pid] = {
                    "a": fit.a,
                    "b": fit.b,
                    "c": fit.c,
                    "r_squared": fit.r_squared,
                    "residual_sse": fit.residual_sse,
                    "point_count": fit.point_count,
                    "size_min": fit.size_min,
                    "size_max": fit.size_max,
                    "backend_id": backend_id,
                }
        if not per_topic:
            raise FitError(f"no period of {topic!r} has enough ladder points to fit")
        payload[topic] = per_topic
        print(f"{topic}: fitted {len(per_topic)} period curves")
    _write_json(ws / "curves.json", {"topics": payload}, cfg)
    return 0


def cmd_effectiveness(args: argparse.Namespace) -> int:
    cfg = _load_config(args)
    ws = _workspace(args)
    curves = _read_artifact(ws / "curves.json", "curves")
    manifest = _manifest(ws)
    if not manifest.path.exists():
        raise DataError(f"{manifest.path} is missing; run the train subcommand first")
    records = manifest.read()
    topics = args.topic or sorted(curves["topics"])
    for topic in topics:
        if topic not in curves["topics"]:
            raise FitError(f"topic {topic!r} has no fitted curves; run the curves subcommand first")
        fits = {
            pid: LearningCurveFit(topic=topic, period_id=pid, **d)
            for pid, d in curves["topics"][topic].items()
        }
        reference = args.reference or cfg.reference_period or min(fits)
        series = build_effectiveness_series(records, topic, reference, fits)
        _write_json(
            ws / "effectiveness" / f"{topic}.json", _series_to_dict(series), cfg
        )
        _write_csv(
            ws / "effectiveness" / f"{topic}.csv",
            render_effectiveness_csv(series),
            cfg,
        )
        note = f", skipped {series.skipped_periods}" if series.skipped_periods else ""
        print(f"{topic}: {len(series.points)} points vs {series.train_period}{note}")
    return 0


def cmd_decay(args: argparse.Namespace) -> int:
    cfg = _load_config(args)
    ws = _workspace(args)
    all_series = _load_series_files(ws, args.topic or None)
    payload = {}
    for topic, series in sorted(all_series.items()):
        fit = fit_exponential_decay(
            series,
            intercept=args.intercept or cfg.decay_intercept,
            clip_at_one=not args.no_clip and cfg.clip_at_one,
            cap=cfg.half_life_cap,
        )
        d = dataclasses.asdict(fit)
        d.pop("topic")
        payload[topic] = d
        print(
            f"{topic}: rate {fit.mu:+.3f}/year, half-life {fit.half_life.display}, "
            f"p={fit.p_value:.3G}"
        )
    _write_json(ws / "decay.json", {"topics": payload}, cfg)
    return 0


def cmd_pairwise(args: argparse.Namespace) -> int:
    cfg = _load_config(args)
    ws = _workspace(args)
    all_series = _load_series_files(ws, args.topic or None)
    topics = sorted(all_series)
    if len(topics) < 2:
        raise DataError("pairwise needs at least two topics with effectiveness series")
    pairs = []
    for i, ti in enumerate(topics):
        for tj in topics[i + 1 :]:
            pair = pairwise_decay_difference(
                all_series[ti],
                all_series[tj],
                intercept=cfg.decay_intercept,
                clip_at_one=cfg.clip_at_one,
            )
            pairs.append(dataclasses.asdict(pair) | {"band": int(pair.band)})
    _write_json(ws / "pairwise.json", {"pairs": pairs}, cfg)
    print(f"tested {len(pairs)} topic pairs")
    return 0


def cmd_forms(args: argparse.Namespace) -> int:
    cfg = _load_config(args)
    ws = _workspace(args)
    all_series = _load_series_files(ws, args.topic or None)
    payload = {}
    for topic, series in sorted(all_series.items()):
        cmp = compare_functional_forms(series, clip_at_one=cfg.clip_at_one)
        d = dataclasses.asdict(cmp)
        d.pop("topic")
        payload[topic] = d
        print(f"{topic}: {cmp.verdict} (exp sse {cmp.exp_sse:.4G}, pow sse {cmp.pow_sse:.4G})")
    _write_json(ws / "forms.json", {"topics": payload}, cfg)
    return 0


def cmd_offload(args: argparse.Namespace) -> int:
    """Simulate greedy off-loading of aged data.

    With --mu the model is a pure exponential, under which no drop ever
    pays; useful as a baseline.  Otherwise each topic's fitted decay rate
    is combined with its reference-period learning curve (a, b) into a
    size-dependent drift model matching the measured decay at the fitted
    size, which is where off-loading can win.
    """
    cfg = _load_config(args)
    ws = _workspace(args)
    jobs: dict[str, dict] = {}
    if args.mu is not None:
        topic = args.topic[0] if args.topic else "custom"
        jobs[topic] = {
            "mu": args.mu,
            "model": PureExponential(max(args.mu, 0.0)),
            "kind": "pure_exponential",
            "size": args.size or 1e6,
        }
    else:
        decay = _read_artifact(ws / "decay.json", "decay")
        curves = _read_artifact(ws / "curves.json", "curves")
        topics = args.topic or sorted(decay["topics"])
        for topic in topics:
            if topic not in decay["topics"]:
                raise DataError(f"no decay fit for {topic!r}; run the decay subcommand first")
            if topic not in curves["topics"]:
                raise DataError(f"no curves for {topic!r}; run the curves subcommand first")
            mu = decay["topics"][topic]["mu"]
            reference = min(curves["topics"][topic])
            curve = curves["topics"][topic][reference]
            a, b = curve["a"], curve["b"]
            n_ref = float(args.size if args.size else curve["size_max"])
            rate = max(mu, 0.0) * a * b / n_ref**b
            jobs[topic] = {
                "mu": mu,
                "model": DriftShift(a=a, b=b, drift=linear_drift(rate)),
                "kind": "drift_shift",
                "size": n_ref,
                "curve_period": reference,
                "drift_rate": rate,
            }
    payload = {}
    for topic, spec in sorted(jobs.items()):
        model = spec.pop("model")
        density = SamplingDensity.uniform(args.window, bins=args.bins)
        comp = DatasetComposition(density=density, size=spec["size"])
        traj = greedy_offload(comp, model)
        payload[topic] = spec | {
            "window_years": args.window,
            "bins": args.bins,
            "steps": [dataclasses.asdict(s) for s in traj.steps],
            "kept_size": traj.final.size,
            "kept_window_years": traj.final.density.window,
            "final_equivalent_age": traj.final_t_star,
        }
        print(
            f"{topic}: dropped {len(traj.steps)} bins, kept {traj.final.size:.0f} "
            f"of {spec['size']:.0f} tokens, equivalent age {traj.final_t_star:.3f}y"
        )
    _write_json(ws / "offload.json", {"topics": payload}, cfg)
    return 0


def cmd_report(args: argparse.Namespace) -> int:
    cfg = _load_config(args)
    ws = _workspace(args)
    reports = ws / "reports"
    manifest = _manifest(ws)
    records = manifest.read() if manifest.path.exists() else []

    fits: list[DecayFit] = []
    decay_path = ws / "decay.json"
    if decay_path.exists():
        decay = json.loads(decay_path.read_text(encoding="utf-8"))
        fits = [
            _decay_fit_from_dict(topic, d)
            for topic, d in sorted(decay["topics"].items())
        ]
    pairs = []
    pairwise_path = ws / "pairwise.json"
    if pairwise_path.exists():
        raw = json.loads(pairwise_path.read_text(encoding="utf-8"))
        for p in raw["pairs"]:
            p = dict(p)
            p["band"] = Band(p["band"])
            pairs.append(PairwiseFit(**p))

    _write_csv(reports / "decay_rates.csv", render_rate_table(fits), cfg)
    _write_csv(reports / "rate_gaps.csv", render_band_matrix(fits, pairs), cfg)

    charted = 0
    eff_root = ws / "effectiveness"
    if eff_root.is_dir():
        chart_series = []
        for path in sorted(eff_root.glob("*.json")):
            series = _series_from_dict(json.loads(path.read_text(encoding="utf-8")))
            _write_csv(
                reports / f"effectiveness_{series.topic}.csv",
                render_effectiveness_csv(series),
                cfg,
            )
            chart_series.append(
                Series(label=series.topic, x=list(series.t), y=list(series.y))
            )
            charted += 1
        if chart_series:
            _write_svg(
                reports / "effectiveness.svg",
                line_chart(
                    chart_series,
                    title="Effectiveness vs age gap",
                    x_label="age gap (years)",
                    y_label="effectiveness",
                ),
                cfg,
            )
    print(
        f"wrote reports for {len(fits)} decay fits, {len(pairs)} pairs, "
        f"{charted} effectiveness series ({len(records)} manifest records) to {reports}"
    )
    return 0


# -- parser ---------------------------------------------------------------


def _add_common(p: argparse.ArgumentParser, seed: bool = True) -> None:
    p.add_argument("--config", help="JSON config file")
    p.add_argument("--workspace", default="workspace", help="artifact directory")
    if seed:
        p.add_argument("--seed", type=int, help="override the config seed")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="perishability", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("synth", help="generate a drifting synthetic corpus")
    _add_common(p)
    p.add_argument("--drift", type=float, required=True, help="drift speed per year")
    p.add_argument("--out", required=True, help="corpus file to write")
    p.add_argument("--periods", type=int, default=12, help="number of monthly periods")
    p.add_argument("--words", type=int, default=200_000, help="words per period")
    p.add_argument("--vocab", type=int, default=64, help="vocabulary size")
    p.add_argument("--start", default="2012-01", help="first period YYYY-MM")
    p.add_argument("--topic", default="synthetic", help="topic label")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("ingest", help="parse raw corpus files into a workspace")
    _add_common(p, seed=False)
    p.add_argument("--input", required=True, action="append", help="flat corpus file")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("slice", help="cut topics into per-period splits")
    _add_common(p)
    p.add_argument("--topic", action="append", help="restrict to a topic")
    p.set_defaults(func=cmd_slice)

    p = sub.add_parser("ladder", help="plan training-subset sizes")
    _add_common(p, seed=False)
    p.add_argument("--topic", action="append", help="restrict to a topic")
    p.set_defaults(func=cmd_ladder)

    p = sub.add_parser("train", help="train and evaluate models into the manifest")
    p.add_argument("--config", help="JSON config file")
    p.add_argument("--workspace", default="workspace", help="artifact directory")
    p.add_argument("--topic", action="append", help="restrict to a topic")
    p.add_argument("--backend", choices=["ngram", "external"], default="ngram")
    p.add_argument("--periods", help="restrict to YYYY-MM..YYYY-MM inclusive")
    p.add_argument("--seed", type=int, action="append", help="seed (repeatable)")
    p.add_argument("--jobs", type=int, default=1, help="worker pool size")
    p.add_argument(
        "--cross",
        choices=["reference", "full", "none"],
        default="reference",
        help="which models also evaluate on other periods' tests",
    )
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("curves", help="fit per-period learning curves")
    _add_common(p, seed=False)
    p.add_argument("--topic", action="append", help="restrict to a topic")
    p.set_defaults(func=cmd_curves)

    p = sub.add_parser("effectiveness", help="build effectiveness series")
    _add_common(p, seed=False)
    p.add_argument("--topic", action="append", help="restrict to a topic")
    p.add_argument("--reference", help="reference period YYYY-MM")
    p.set_defaults(func=cmd_effectiveness)

    p = sub.add_parser("decay", help="fit exponential decay per topic")
    _add_common(p, seed=False)
    p.add_argument("--topic", action="append", help="restrict to a topic")
    p.add_argument("--intercept", action="store_true", help="fit a free intercept")
    p.add_argument("--no-clip", action="store_true", help="keep effectiveness above 1")
    p.set_defaults(func=cmd_decay)

    p = sub.add_parser("pairwise", help="test decay-rate gaps between topics")
    _add_common(p, seed=False)
    p.add_argument("--topic", action="append", help="restrict to these topics")
    p.set_defaults(func=cmd_pairwise)

    p = sub.add_parser("forms", help="exponential vs power-law comparison")
    _add_common(p, seed=False)
    p.add_argument("--topic", action="append", help="restrict to a topic")
    p.set_defaults(func=cmd_forms)

    p = sub.add_parser("offload", help="simulate greedy off-loading")
    _add_common(p, seed=False)
    p.add_argument("--topic", action="append", help="restrict to a topic")
    p.add_argument("--mu", type=float, help="decay rate override, skips decay.json")
    p.add_argument("--window", type=float, default=2.0, help="data window in years")
    p.add_argument("--bins", type=int, default=12, help="age bins across the window")
    p.add_argument(
        "--size", type=float, help="dataset size in tokens (default: fitted curve top size)"
    )
    p.set_defaults(func=cmd_offload)

    p = sub.add_parser("report", help="emit summary tables, CSVs and charts")
    _add_common(p, seed=False)
    p.set_defaults(func=cmd_report)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except FitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except PerishabilityError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
