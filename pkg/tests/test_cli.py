"""Command-line chain on a tiny two-topic corpus, plus exit-code contracts."""

import json

import pytest

from perishability import RunConfig
from perishability.cli import main

TINY = dict(
    period_min_words=4_000,
    dev_min_words=300,
    test_min_words=300,
    ladder_top=2_400,
    ladder_floor=300,
)


def write_config(dirpath, **overrides):
    cfg = RunConfig(**{**TINY, **overrides})
    path = dirpath / "config.json"
    path.write_text(json.dumps(cfg.to_dict()), encoding="utf-8")
    return path, cfg


def synth_args(cfg_path, out, topic, drift):
    return [
        "synth",
        "--config",
        str(cfg_path),
        "--drift",
        str(drift),
        "--out",
        str(out),
        "--periods",
        "4",
        "--words",
        "5000",
        "--vocab",
        "32",
        "--topic",
        topic,
    ]


@pytest.fixture(scope="module")
def chain(tmp_path_factory):
    """Every subcommand once, in order, over topics with unequal drift."""
    root = tmp_path_factory.mktemp("cli")
    cfg_path, cfg = write_config(root)
    ws = root / "ws"
    rcs = {}
    inputs = []
    for topic, drift in (("alpha", 0.2), ("beta", 2.0)):
        out = root / f"{topic}.txt"
        rcs[f"synth-{topic}"] = main(synth_args(cfg_path, out, topic, drift))
        inputs += ["--input", str(out)]
    base = ["--config", str(cfg_path), "--workspace", str(ws)]
    rcs["ingest"] = main(["ingest", *base, *inputs])
    for cmd in (
        "slice",
        "ladder",
        "train",
        "curves",
        "effectiveness",
        "decay",
        "pairwise",
        "forms",
        "offload",
        "report",
    ):
        rcs[cmd] = main([cmd, *base])
    return root, ws, cfg, rcs


def test_chain_succeeds(chain):
    _, _, _, rcs = chain
    assert rcs == {name: 0 for name in rcs}


def test_synth_writes_hash_sidecar(chain):
    root, _, cfg, _ = chain
    meta = json.loads((root / "alpha.txt.meta.json").read_text(encoding="utf-8"))
    assert meta["config_hash"] == cfg.hash()
    assert meta["topic"] == "alpha"
    assert meta["periods"] == ["2012-01", "2012-02", "2012-03", "2012-04"]
    assert meta["seed"] == cfg.seed


def test_ingest_keeps_every_document(chain):
    _, ws, _, _ = chain
    lines = (ws / "documents.jsonl").read_text(encoding="utf-8").splitlines()
    # 2 topics x 4 periods x (5000 words / 100 per document)
    assert len(lines) == 400


def test_slice_and_ladder_artifacts(chain):
    _, ws, cfg, _ = chain
    for topic in ("alpha", "beta"):
        for pid in ("2012-01", "2012-02", "2012-03", "2012-04"):
            d = ws / "slices" / topic / pid
            assert (d / "train.txt").exists()
            meta = json.loads((d / "slice.json").read_text(encoding="utf-8"))
            assert meta["ladder_sizes"] == [2_400, 1_200, 600, 300]
            assert meta["config_hash"] == cfg.hash()


def test_train_manifest_line_count(chain):
    _, ws, _, _ = chain
    lines = (ws / "manifest.jsonl").read_text(encoding="utf-8").splitlines()
    # per topic: 4 periods x 4 rungs native plus 3 reference cross evals
    assert len(lines) == 2 * (16 + 3)


def test_curves_artifact(chain):
    _, ws, cfg, _ = chain
    payload = json.loads((ws / "curves.json").read_text(encoding="utf-8"))
    assert payload["config_hash"] == cfg.hash()
    assert sorted(payload["topics"]) == ["alpha", "beta"]
    for per_topic in payload["topics"].values():
        assert sorted(per_topic) == ["2012-01", "2012-02", "2012-03", "2012-04"]
        for fit in per_topic.values():
            assert fit["b"] > 0
            assert fit["backend_id"] == "ngram-o4-em"
            assert fit["point_count"] == 4


def test_effectiveness_artifacts(chain):
    _, ws, cfg, _ = chain
    payload = json.loads(
        (ws / "effectiveness" / "alpha.json").read_text(encoding="utf-8")
    )
    assert payload["config_hash"] == cfg.hash()
    assert payload["train_period"] == "2012-01"
    assert len(payload["points"]) == 4
    deltas = [p["delta_years"] for p in payload["points"]]
    assert deltas == pytest.approx([0, 1 / 12, 2 / 12, 3 / 12])
    csv_text = (ws / "effectiveness" / "alpha.csv").read_text(encoding="utf-8")
    assert csv_text.endswith(f"# config_hash={cfg.hash()}\n")


def test_decay_artifact(chain):
    _, ws, _, _ = chain
    payload = json.loads((ws / "decay.json").read_text(encoding="utf-8"))
    for topic in ("alpha", "beta"):
        d = payload["topics"][topic]
        assert set(d) >= {"mu", "stderr", "p_value", "half_life", "intercept_used"}
        assert d["intercept_used"] is False
        assert set(d["half_life"]) == {"years", "display", "censored"}


def test_pairwise_artifact(chain):
    _, ws, _, _ = chain
    payload = json.loads((ws / "pairwise.json").read_text(encoding="utf-8"))
    assert len(payload["pairs"]) == 1
    pair = payload["pairs"][0]
    assert (pair["topic_i"], pair["topic_j"]) == ("alpha", "beta")
    assert pair["band"] in (0, 1, 2, 3)
    # all four age gaps are shared, the zero gap included
    assert pair["n_points"] == 4


def test_forms_artifact(chain):
    _, ws, _, _ = chain
    payload = json.loads((ws / "forms.json").read_text(encoding="utf-8"))
    for topic in ("alpha", "beta"):
        d = payload["topics"][topic]
        assert d["verdict"] in ("exponential", "power_law", "inconclusive")
        assert d["excluded_zero_dt"] == 1


def test_offload_artifact(chain):
    _, ws, _, _ = chain
    payload = json.loads((ws / "offload.json").read_text(encoding="utf-8"))
    for topic in ("alpha", "beta"):
        d = payload["topics"][topic]
        assert d["kind"] == "drift_shift"
        assert d["curve_period"] == "2012-01"
        assert d["kept_size"] <= d["size"]
        assert d["window_years"] == 2.0
        assert 0 <= len(d["steps"]) <= d["bins"] == 12


def test_report_artifacts(chain):
    _, ws, cfg, _ = chain
    reports = ws / "reports"
    rates = (reports / "decay_rates.csv").read_text(encoding="utf-8")
    lines = rates.splitlines()
    assert lines[0] == "topic,estimate_per_year,half_life_years,stderr,p_value"
    assert len([l for l in lines if l and not l.startswith("#")]) == 3
    assert rates.endswith(f"# config_hash={cfg.hash()}\n")
    assert (reports / "rate_gaps.csv").exists()
    assert (reports / "effectiveness_alpha.csv").exists()
    assert (reports / "effectiveness_beta.csv").exists()
    svg = (reports / "effectiveness.svg").read_text(encoding="utf-8")
    assert "<svg" in svg
    assert svg.rstrip().endswith(f"<!-- config_hash={cfg.hash()} -->")


def test_offload_mu_baseline(tmp_path):
    ws = tmp_path / "ws"
    rc = main(
        ["offload", "--workspace", str(ws), "--mu", "0.3", "--topic", "news"]
    )
    assert rc == 0
    payload = json.loads((ws / "offload.json").read_text(encoding="utf-8"))
    d = payload["topics"]["news"]
    assert d["kind"] == "pure_exponential"
    assert d["steps"] == []


def test_report_on_empty_workspace(tmp_path):
    ws = tmp_path / "ws"
    assert main(["report", "--workspace", str(ws)]) == 0
    rates = (ws / "reports" / "decay_rates.csv").read_text(encoding="utf-8")
    assert rates.startswith("topic,estimate_per_year")


def test_missing_artifacts_name_the_prior_step(tmp_path, capsys):
    ws = ["--workspace", str(tmp_path / "ws")]
    expectations = [
        (["slice"], "ingest subcommand"),
        (["ladder"], "slice subcommand"),
        (["train"], "slice subcommand"),
        (["curves"], "train subcommand"),
        (["effectiveness"], "curves subcommand"),
        (["decay"], "effectiveness subcommand"),
        (["pairwise"], "effectiveness subcommand"),
        (["forms"], "effectiveness subcommand"),
        (["offload"], "decay subcommand"),
    ]
    for argv, hint in expectations:
        assert main(argv + ws) == 2, argv
        assert hint in capsys.readouterr().err, argv


def test_usage_errors_exit_1(tmp_path):
    assert main([]) == 1
    assert main(["no-such-command"]) == 1
    assert main(["synth", "--workspace", str(tmp_path)]) == 1


def test_ingest_missing_input_exits_2(tmp_path):
    rc = main(
        ["ingest", "--workspace", str(tmp_path / "ws"), "--input", str(tmp_path / "no.txt")]
    )
    assert rc == 2


@pytest.fixture(scope="module")
def single_rung_ws(tmp_path_factory):
    """Workspace whose ladders have one rung, too few for any curve fit."""
    root = tmp_path_factory.mktemp("rung")
    cfg_path, cfg = write_config(root, ladder_floor=2_400)
    ws = root / "ws"
    out = root / "solo.txt"
    assert main(synth_args(cfg_path, out, "solo", 0.5)) == 0
    base = ["--config", str(cfg_path), "--workspace", str(ws)]
    assert main(["ingest", *base, "--input", str(out)]) == 0
    for cmd in ("slice", "ladder", "train"):
        assert main([cmd, *base]) == 0
    return base


def test_unfittable_curves_exit_3(single_rung_ws, capsys):
    assert main(["curves", *single_rung_ws]) == 3
    assert "enough ladder points" in capsys.readouterr().err


def test_train_period_restriction(single_rung_ws, capsys):
    rc = main(["train", *single_rung_ws, "--periods", "2012-02..2012-03"])
    assert rc == 0
    # 2 periods x 1 rung native plus 1 cross eval from the restricted reference
    assert "appended 3 manifest lines" in capsys.readouterr().out

    assert main(["train", *single_rung_ws, "--periods", "201202"]) == 2
    assert "bad period range" in capsys.readouterr().err

    assert main(["train", *single_rung_ws, "--periods", "2020-01..2020-12"]) == 2
    assert main(["train", *single_rung_ws, "--backend", "external"]) == 2
    assert "backend_command" in capsys.readouterr().err


def test_train_jobs_note(single_rung_ws, capsys):
    assert main(["train", *single_rung_ws, "--jobs", "4"]) == 0
    assert "treated as 1" in capsys.readouterr().out


def test_synth_seed_override(tmp_path):
    cfg_path, _ = write_config(tmp_path)
    out = tmp_path / "c.txt"
    argv = synth_args(cfg_path, out, "s", 0.1) + ["--seed", "5"]
    assert main(argv) == 0
    meta = json.loads((tmp_path / "c.txt.meta.json").read_text(encoding="utf-8"))
    assert meta["seed"] == 5


def test_decay_intercept_flag(chain, capsys):
    # Reruns decay last; it rewrites decay.json for this module's workspace.
    root, ws, _, _ = chain
    base = ["--config", str(root / "config.json"), "--workspace", str(ws)]
    assert main(["decay", *base, "--intercept"]) == 0
    capsys.readouterr()
    payload = json.loads((ws / "decay.json").read_text(encoding="utf-8"))
    assert payload["topics"]["alpha"]["intercept_used"] is True
