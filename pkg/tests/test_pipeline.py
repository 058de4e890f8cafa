import json

import numpy as np
import pytest

from chainrank.cli import main as cli_main
from chainrank.errors import DataError, StageError
from chainrank.fixtures import documents_to_jsonl, make_fixture
from chainrank.pipeline import (
    ExperimentConfig,
    make_report,
    run_experiment,
    run_stage,
)
from chainrank.simulate import PairEvalResult, UserBehavior, write_intents
from chainrank.solver import model_to_json


@pytest.fixture(scope="module")
def small_fixture():
    return make_fixture(300, 13)


@pytest.fixture
def cfg(tmp_path, small_fixture):
    docs, intents = small_fixture
    corpus_path = tmp_path / "corpus.jsonl"
    corpus_path.write_text(documents_to_jsonl(docs), encoding="utf-8")
    intents_path = tmp_path / "intents.json"
    intents_path.write_text(write_intents(intents), encoding="utf-8")
    cfg_path = tmp_path / "experiment.json"
    cfg_path.write_text(json.dumps({
        "corpus": str(corpus_path),
        "intents": str(intents_path),
        "workdir": str(tmp_path / "out"),
        "seed": 11,
        "sessions": 80,
        "eval_sessions": 40,
        "max_iters": 3000,
    }))
    config = ExperimentConfig.from_file(cfg_path)
    config.config_path = cfg_path
    return config


def run_all_stages(cfg):
    run_stage("index", cfg)
    run_stage("simulate", cfg)
    run_stage("chains", cfg)
    for mode in ("qc", "nc"):
        run_stage("prefs", cfg, mode=mode)
        run_stage("train", cfg, mode=mode)
    run_stage("interleave", cfg)
    return run_stage("report", cfg)


def test_full_pipeline_stages(cfg):
    report, text = run_all_stages(cfg)
    assert {p["modes"] for p in report["pairs"]} == {"qc_vs_base", "qc_vs_nc"}
    for p in report["pairs"]:
        assert p["wins_a"] + p["wins_b"] + p["ties"] == p["impressions"]
    assert "prefer qc" in text
    for name in ("index.json", "log.jsonl", "truth.jsonl", "chains.jsonl",
                 "prefs_qc.jsonl", "prefs_nc.jsonl", "model_qc.json",
                 "model_nc.json", "eval_qc_vs_base.json", "report.json"):
        assert cfg.path(name).exists(), name


def test_stage_rerun_byte_identical(cfg):
    run_all_stages(cfg)
    artifacts = ["log.jsonl", "chains.jsonl", "prefs_qc.jsonl", "model_qc.json",
                 "eval_qc_vs_base.json", "report.json"]
    before = {name: cfg.path(name).read_bytes() for name in artifacts}
    # delete a downstream artifact and rerun just its stage
    cfg.path("prefs_qc.jsonl").unlink()
    run_stage("prefs", cfg, mode="qc")
    run_stage("train", cfg, mode="qc")
    run_stage("interleave", cfg, pair=("qc", "base"))
    run_stage("report", cfg)
    for name in artifacts:
        assert cfg.path(name).read_bytes() == before[name], name


def test_missing_artifact_named_error(cfg):
    run_stage("index", cfg)
    with pytest.raises(StageError, match="log.jsonl.*simulate"):
        run_stage("chains", cfg)


def test_version_mismatch_refused(cfg):
    run_stage("index", cfg)
    run_stage("simulate", cfg)
    meta = cfg.path("log.jsonl.meta.json")
    stamped = json.loads(meta.read_text())
    stamped["version"] = 99
    meta.write_text(json.dumps(stamped))
    with pytest.raises(StageError, match="version 99"):
        run_stage("chains", cfg)


def test_unknown_stage(cfg):
    with pytest.raises(StageError, match="unknown stage"):
        run_stage("compress", cfg)


def test_nc_prefs_subset_of_qc_and_weight_counts(cfg):
    run_stage("index", cfg)
    run_stage("simulate", cfg)
    run_stage("chains", cfg)
    run_stage("prefs", cfg, mode="qc")
    run_stage("prefs", cfg, mode="nc")
    qc_lines = cfg.path("prefs_qc.jsonl").read_text().splitlines()
    nc_lines = cfg.path("prefs_nc.jsonl").read_text().splitlines()
    from collections import Counter
    qc_multi, nc_multi = Counter(qc_lines), Counter(nc_lines)
    assert all(qc_multi[k] >= v for k, v in nc_multi.items())

    run_stage("train", cfg, mode="qc")
    run_stage("train", cfg, mode="nc")
    qc_model = json.loads(cfg.path("model_qc.json").read_text())
    nc_model = json.loads(cfg.path("model_nc.json").read_text())
    n_nonzero = lambda m: sum(1 for r in m["term_doc_weights"] if r["w"] != 0.0)
    assert n_nonzero(qc_model) >= n_nonzero(nc_model)


def test_rerank_stage_injects_learned_docs(cfg):
    run_all_stages(cfg)
    ranking = run_stage("rerank", cfg, query="spectrograf", mode="qc", k=5)
    assert any(e.origin == "term_association" for e in ranking.entries)
    base = run_stage("rerank", cfg, query="spectrograf", mode="base", k=5)
    assert len(base) == 0  # the misspelling matches nothing in the corpus


def test_report_golden_counts():
    report, text = make_report([
        ("qc", "base", PairEvalResult(wins_a=392, wins_b=239, ties=579, impressions=1210)),
    ])
    pair = report["pairs"][0]
    assert pair["p"] < 0.01
    assert pair["verdict"] == "prefer qc, p < 0.01"
    assert "392 (32%)" in text and "239 (20%)" in text and "579 (48%)" in text


def test_report_indifferent_when_no_wins():
    report, _ = make_report([
        ("qc", "nc", PairEvalResult(wins_a=0, wins_b=0, ties=25, impressions=25)),
    ])
    assert report["pairs"][0]["verdict"] == "indifferent"
    assert report["pairs"][0]["p"] == 1.0


def test_run_experiment_deterministic(small_fixture):
    docs, intents = small_fixture
    kw = dict(seed=5, sessions=60, eval_sessions=30,
              behavior=UserBehavior(click_noise=0.1), max_iters=300)
    a = run_experiment(docs, intents, **kw)
    b = run_experiment(docs, intents, **kw)
    assert a.report == b.report
    assert model_to_json(a.models["qc"]) == model_to_json(b.models["qc"])


def test_config_validation(tmp_path):
    with pytest.raises(DataError, match="positive"):
        ExperimentConfig(corpus="c", intents="i", sessions=0)
    with pytest.raises(DataError, match="comparison"):
        ExperimentConfig(corpus="c", intents="i", comparisons=[["qc", "qc"]])
    path = tmp_path / "cfg.json"
    path.write_text('{"corpus": "c", "intents": "i", "bogus_field": 1}')
    with pytest.raises(DataError, match="bogus_field"):
        ExperimentConfig.from_file(path)
    with pytest.raises(StageError, match="not found"):
        ExperimentConfig.from_file(tmp_path / "absent.json")


def test_missing_corpus_path_is_stage_error(tmp_path):
    cfg = ExperimentConfig(corpus=str(tmp_path / "nope"), intents="i",
                           workdir=str(tmp_path / "out"))
    with pytest.raises(StageError, match="corpus path"):
        run_stage("index", cfg)


def test_cli_exit_codes(cfg, capsys):
    config_path = str(cfg.config_path)
    assert cli_main(["index", "--config", config_path]) == 0
    # usage error: unknown stage
    assert cli_main(["frobnicate", "--config", config_path]) == 1
    # usage error: missing required option
    assert cli_main(["index"]) == 1
    # data error: chains before simulate
    assert cli_main(["chains", "--config", config_path]) == 2
    capsys.readouterr()


def test_cli_end_to_end(cfg, capsys):
    config_path = str(cfg.config_path)
    for args in (["index"], ["simulate"], ["chains"],
                 ["prefs", "--mode", "qc"], ["prefs", "--mode", "nc"],
                 ["train", "--mode", "qc"], ["train", "--mode", "nc"],
                 ["interleave"], ["report"]):
        assert cli_main(args + ["--config", config_path]) == 0, args
    out = capsys.readouterr().out
    assert "qc vs base" in out
    assert cli_main(["rerank", "--config", config_path,
                     "--query", "sourdough", "--mode", "qc"]) == 0
    out = capsys.readouterr().out
    assert "\t" in out  # doc, score, origin columns


def test_cli_seed_override_changes_artifacts(cfg):
    config_path = str(cfg.config_path)
    assert cli_main(["index", "--config", config_path]) == 0
    assert cli_main(["simulate", "--config", config_path]) == 0
    first = cfg.path("log.jsonl").read_bytes()
    assert cli_main(["simulate", "--config", config_path, "--seed", "99"]) == 0
    assert cfg.path("log.jsonl").read_bytes() != first


def test_cli_log_verbosity_env(cfg, monkeypatch, caplog):
    monkeypatch.setenv("CHAINRANK_LOG", "info")
    import logging
    with caplog.at_level(logging.INFO, logger="chainrank.pipeline"):
        assert cli_main(["index", "--config", str(cfg.config_path)]) == 0
    assert any("indexed" in r.message for r in caplog.records)
