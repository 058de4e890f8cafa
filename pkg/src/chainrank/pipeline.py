"""Experiment orchestration: staged pipeline, artifacts on disk, reporting.

Stages (index, simulate, chains, prefs, train, rerank, interleave, report)
read versioned artifacts written by their upstream stages into the working
directory and are individually deterministic: a rerun with identical inputs
reproduces each artifact byte for byte.  Every stage draws randomness from a
generator derived from (config seed, stage number).

`run_experiment` chains the same steps in memory for tests and small runs.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np

from .chains import read_chains, segment_log, write_chains
from .corpus import Corpus, base_retrieve, build_index, load_documents, load_index, save_index, tokenize
from .errors import DataError, StageError
from .features import FeatureSpace, phi
from .feedback import Preference, prefs_for_log, read_preferences, strategy_counts, write_preferences
from .interleave import sign_test
from .logs import SearchLog, parse_log, write_log
from .ranking import RerankRequest, ScoredRanking, rerank
from .simulate import (
    Intent,
    PairEvalResult,
    UserBehavior,
    interleaved_eval,
    read_intents,
    simulate,
    write_truth,
)
from .solver import Model, PreferenceConstraint, fit_model, load_model, save_model

log = logging.getLogger(__name__)

ARTIFACT_VERSION = 1
BASE_FN = "base"
BASE_DEPTH = 100  # base ranking depth used for rank features at serving time
_STAGE_SEEDS = {"simulate": 1, "prefs": 2, "interleave": 3}


@dataclass
class ExperimentConfig:
    corpus: str
    intents: str
    workdir: str = "out"
    seed: int = 7
    sessions: int = 2000
    eval_sessions: int = 1000
    results_per_query: int = 10
    window_seconds: int = 1800
    C: float = 1.0
    w_min: float = 1.0
    tolerance: float = 1e-6
    max_iters: int = 10000
    noise: float = 0.1
    scan_persistence: float = 0.85
    reformulate_prob: float = 0.95
    comparisons: list[list[str]] = field(
        default_factory=lambda: [["qc", "base"], ["qc", "nc"]]
    )

    def __post_init__(self):
        for name in ("sessions", "eval_sessions", "results_per_query", "window_seconds",
                     "C", "w_min", "tolerance", "max_iters"):
            if getattr(self, name) <= 0:
                raise DataError(f"config field {name} must be positive")
        known = {"base", "qc", "nc"}
        for pair in self.comparisons:
            if len(pair) != 2 or not set(pair) <= known or pair[0] == pair[1]:
                raise DataError(f"bad comparison {pair}; sides must be two of {sorted(known)}")

    @classmethod
    def from_file(cls, path: str | Path, overrides: dict | None = None) -> "ExperimentConfig":
        try:
            raw = json.loads(Path(path).read_text(encoding="utf-8"))
        except FileNotFoundError:
            raise StageError(f"config file not found: {path}")
        except json.JSONDecodeError as exc:
            raise DataError(f"config file {path} is not valid JSON: {exc}")
        raw.update(overrides or {})
        names = {f.name for f in fields(cls)}
        unknown = set(raw) - names
        if unknown:
            raise DataError(f"unknown config fields: {sorted(unknown)}")
        return cls(**raw)

    def behavior(self) -> UserBehavior:
        return UserBehavior(
            scan_persistence=self.scan_persistence,
            click_noise=self.noise,
            reformulate_prob=self.reformulate_prob,
        )

    def path(self, name: str) -> Path:
        return Path(self.workdir) / name


def _stage_seed(seed: int, stage: str) -> int:
    return int(np.random.SeedSequence([seed, _STAGE_SEEDS[stage]]).generate_state(1)[0])


def _write_artifact(path: Path, text: str, meta: dict) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")
    meta_path = path.with_name(path.name + ".meta.json")
    meta_path.write_text(
        json.dumps({"version": ARTIFACT_VERSION, **meta}, sort_keys=True, separators=(",", ":")),
        encoding="utf-8",
    )


def _require(path: Path, producer: str) -> str:
    if not path.exists():
        raise StageError(f"missing artifact {path}; run the '{producer}' stage first")
    meta_path = path.with_name(path.name + ".meta.json")
    if meta_path.exists():
        meta = json.loads(meta_path.read_text(encoding="utf-8"))
        if meta.get("version") != ARTIFACT_VERSION:
            raise StageError(
                f"artifact {path} has version {meta.get('version')}, "
                f"expected {ARTIFACT_VERSION}; refusing to use it"
            )
    return path.read_text(encoding="utf-8")


def base_ranker(corpus: Corpus):
    """Memoizing baseline ranker closure (queries repeat heavily in simulation)."""
    cache: dict = {}

    def rank(terms: list[str], k: int):
        key = (tuple(terms), k)
        if key not in cache:
            cache[key] = base_retrieve(corpus, list(terms), k)
        return cache[key]

    return rank


def model_ranker(corpus: Corpus, model: Model):
    """Ranker closure serving a learned model over fresh base rankings."""
    cache: dict = {}

    def rank(terms: list[str], k: int):
        key = (tuple(terms), k)
        if key not in cache:
            base = base_retrieve(corpus, list(terms), BASE_DEPTH)
            cache[key] = rerank(
                RerankRequest(list(terms), {BASE_FN: base}, model, k)
            )
        return cache[key]

    return rank


def build_constraints(
    prefs: list[Preference], searchlog: SearchLog, space: FeatureSpace
) -> list[PreferenceConstraint]:
    """Turn preferences into feature-difference constraints over a log's rankings."""
    queries = searchlog.queries()
    ranks_cache: dict[str, dict[str, int]] = {}
    fn = space.base_functions[0]
    constraints = []
    for p in prefs:
        q = queries.get(p.wrt_query)
        if q is None:
            raise DataError(f"preference references unknown query {p.wrt_query}")
        ranks = ranks_cache.get(p.wrt_query)
        if ranks is None:
            ranks = {doc: i + 1 for i, doc in enumerate(q.result_docs())}
            ranks_cache[p.wrt_query] = ranks
        phi_pref = phi(space, p.preferred_doc, q.terms, {fn: ranks.get(p.preferred_doc)})
        phi_other = phi(space, p.other_doc, q.terms, {fn: ranks.get(p.other_doc)})
        constraints.append(PreferenceConstraint(phi_pref - phi_other))
    return constraints


def train_from_log(
    searchlog: SearchLog,
    prefs: list[Preference],
    C: float,
    w_min: float,
    tolerance: float,
    max_iters: int,
) -> Model:
    space = FeatureSpace((BASE_FN,))
    constraints = build_constraints(prefs, searchlog, space)
    return fit_model(space, constraints, C=C, w_min=w_min,
                     tolerance=tolerance, max_iters=max_iters)


def make_report(outcomes: list[tuple[str, str, PairEvalResult]]) -> tuple[dict, str]:
    """Summarize interleaved comparisons: counts, sign-test p, 99% verdicts."""
    pairs = []
    lines = [f"{'comparison':<14} {'wins A':>10} {'wins B':>10} {'ties':>10} "
             f"{'p':>10}  verdict"]
    for name_a, name_b, res in outcomes:
        p = sign_test(res.wins_a, res.wins_b)
        total = res.wins_a + res.wins_b + res.ties
        if p < 0.01 and res.wins_a != res.wins_b:
            winner = name_a if res.wins_a > res.wins_b else name_b
            verdict = f"prefer {winner}, p < 0.01"
        else:
            verdict = "indifferent"

        def pct(n):
            return f"{n} ({round(100 * n / total)}%)" if total else f"{n}"

        pairs.append({
            "modes": f"{name_a}_vs_{name_b}",
            "wins_a": res.wins_a,
            "wins_b": res.wins_b,
            "ties": res.ties,
            "impressions": total,
            "p": p,
            "verdict": verdict,
        })
        lines.append(
            f"{name_a + ' vs ' + name_b:<14} {pct(res.wins_a):>10} {pct(res.wins_b):>10} "
            f"{pct(res.ties):>10} {p:>10.3g}  {verdict}"
        )
    return {"version": ARTIFACT_VERSION, "pairs": pairs}, "\n".join(lines)


@dataclass
class ExperimentArtifacts:
    corpus: Corpus
    log: SearchLog
    truth: list
    chains: list
    prefs: dict[str, list[Preference]]
    models: dict[str, Model]
    outcomes: list[tuple[str, str, PairEvalResult]]
    report: dict
    report_text: str


def run_experiment(
    docs,
    intents: list[Intent],
    *,
    seed: int = 7,
    sessions: int = 200,
    eval_sessions: int = 100,
    behavior: UserBehavior | None = None,
    C: float = 1.0,
    w_min: float = 1.0,
    tolerance: float = 1e-6,
    max_iters: int = 10000,
    results_per_query: int = 10,
    window_seconds: int = 1800,
    comparisons: tuple = (("qc", "base"), ("qc", "nc")),
) -> ExperimentArtifacts:
    """Full in-memory pipeline: index, simulate, chains, prefs, train, evaluate."""
    behavior = behavior if behavior is not None else UserBehavior()
    corpus = build_index(docs)
    rank0 = base_ranker(corpus)
    searchlog, truth = simulate(
        corpus, rank0, intents, behavior, sessions,
        _stage_seed(seed, "simulate"), results_per_query,
    )
    chain_list = segment_log(searchlog, window_seconds)
    modes = sorted({m for pair in comparisons for m in pair} - {"base"})
    prefs = {
        mode: prefs_for_log(searchlog, chain_list, mode, corpus.doc_ids(),
                            _stage_seed(seed, "prefs"))
        for mode in modes
    }
    models = {
        mode: train_from_log(searchlog, prefs[mode], C, w_min, tolerance, max_iters)
        for mode in modes
    }
    rankers = {"base": rank0}
    rankers.update({mode: model_ranker(corpus, models[mode]) for mode in modes})
    outcomes = []
    for a, b in comparisons:
        res = interleaved_eval(
            rankers[a], rankers[b], intents, behavior, eval_sessions,
            _stage_seed(seed, "interleave"), results_per_query,
        )
        outcomes.append((a, b, res))
    report, text = make_report(outcomes)
    return ExperimentArtifacts(
        corpus=corpus, log=searchlog, truth=truth, chains=chain_list,
        prefs=prefs, models=models, outcomes=outcomes,
        report=report, report_text=text,
    )


# ---------------------------------------------------------------------------
# Disk-based stages


def stage_index(cfg: ExperimentConfig) -> Path:
    source = Path(cfg.corpus)
    if not source.exists():
        raise StageError(f"corpus path does not exist: {source}")
    corpus = build_index(load_documents(source))
    out = cfg.path("index.json")
    out.parent.mkdir(parents=True, exist_ok=True)
    save_index(corpus, out)  # carries its own version field
    log.info("indexed %d documents -> %s", len(corpus), out)
    return out


def _load_corpus(cfg: ExperimentConfig) -> Corpus:
    path = cfg.path("index.json")
    if not path.exists():
        raise StageError(f"missing artifact {path}; run the 'index' stage first")
    return load_index(path)


def _load_intents(cfg: ExperimentConfig) -> list[Intent]:
    path = Path(cfg.intents)
    if not path.exists():
        raise StageError(f"intent fixture does not exist: {path}")
    return read_intents(path.read_text(encoding="utf-8"))


def stage_simulate(cfg: ExperimentConfig) -> Path:
    corpus = _load_corpus(cfg)
    intents = _load_intents(cfg)
    seed = _stage_seed(cfg.seed, "simulate")
    searchlog, truth = simulate(
        corpus, base_ranker(corpus), intents, cfg.behavior(),
        cfg.sessions, seed, cfg.results_per_query,
    )
    out = cfg.path("log.jsonl")
    _write_artifact(out, write_log(searchlog),
                    {"stage": "simulate", "seed": seed, "sessions": cfg.sessions})
    _write_artifact(cfg.path("truth.jsonl"), write_truth(truth),
                    {"stage": "simulate", "seed": seed})
    log.info("simulated %d sessions -> %s", cfg.sessions, out)
    return out


def stage_chains(cfg: ExperimentConfig) -> Path:
    searchlog = parse_log(_require(cfg.path("log.jsonl"), "simulate"))
    chain_list = segment_log(searchlog, cfg.window_seconds)
    out = cfg.path("chains.jsonl")
    _write_artifact(out, write_chains(chain_list),
                    {"stage": "chains", "window_seconds": cfg.window_seconds,
                     "n_chains": len(chain_list)})
    log.info("segmented %d chains -> %s", len(chain_list), out)
    return out


def stage_prefs(cfg: ExperimentConfig, mode: str = "qc") -> Path:
    searchlog = parse_log(_require(cfg.path("log.jsonl"), "simulate"))
    chain_list = read_chains(_require(cfg.path("chains.jsonl"), "chains"), searchlog)
    corpus = _load_corpus(cfg)
    seed = _stage_seed(cfg.seed, "prefs")
    prefs = prefs_for_log(searchlog, chain_list, mode, corpus.doc_ids(), seed)
    out = cfg.path(f"prefs_{mode}.jsonl")
    _write_artifact(out, write_preferences(prefs),
                    {"stage": "prefs", "mode": mode, "seed": seed,
                     "counts": strategy_counts(prefs)})
    log.info("generated %d %s preferences -> %s", len(prefs), mode, out)
    return out


def stage_train(cfg: ExperimentConfig, mode: str = "qc") -> Path:
    searchlog = parse_log(_require(cfg.path("log.jsonl"), "simulate"))
    prefs = read_preferences(_require(cfg.path(f"prefs_{mode}.jsonl"), "prefs"))
    model = train_from_log(searchlog, prefs, cfg.C, cfg.w_min, cfg.tolerance, cfg.max_iters)
    out = cfg.path(f"model_{mode}.json")
    out.parent.mkdir(parents=True, exist_ok=True)
    save_model(model, out)
    log.info("trained %s model (%s constraints) -> %s", mode,
             model.meta.get("n_constraints"), out)
    return out


def _ranker_for(cfg: ExperimentConfig, corpus: Corpus, side: str):
    if side == "base":
        return base_ranker(corpus)
    path = cfg.path(f"model_{side}.json")
    if not path.exists():
        raise StageError(f"missing artifact {path}; run the 'train' stage first")
    return model_ranker(corpus, load_model(path))


def stage_rerank(cfg: ExperimentConfig, query: str, mode: str = "qc", k: int | None = None) -> ScoredRanking:
    corpus = _load_corpus(cfg)
    terms = tokenize(query)
    ranker = _ranker_for(cfg, corpus, mode)
    return ranker(terms, k if k is not None else cfg.results_per_query)


def stage_interleave(cfg: ExperimentConfig, pair: tuple[str, str] | None = None) -> list[Path]:
    corpus = _load_corpus(cfg)
    intents = _load_intents(cfg)
    seed = _stage_seed(cfg.seed, "interleave")
    pairs = [tuple(p) for p in ([list(pair)] if pair else cfg.comparisons)]
    outputs = []
    for a, b in pairs:
        res = interleaved_eval(
            _ranker_for(cfg, corpus, a), _ranker_for(cfg, corpus, b),
            intents, cfg.behavior(), cfg.eval_sessions, seed, cfg.results_per_query,
        )
        out = cfg.path(f"eval_{a}_vs_{b}.json")
        payload = {"version": ARTIFACT_VERSION, "modes": f"{a}_vs_{b}",
                   "wins_a": res.wins_a, "wins_b": res.wins_b, "ties": res.ties,
                   "impressions": res.impressions, "seed": seed}
        _write_artifact(out, json.dumps(payload, sort_keys=True, separators=(",", ":")),
                        {"stage": "interleave", "seed": seed})
        outputs.append(out)
        log.info("interleaved %s vs %s: %d/%d/%d -> %s",
                 a, b, res.wins_a, res.wins_b, res.ties, out)
    return outputs


def stage_report(cfg: ExperimentConfig) -> tuple[dict, str]:
    outcomes = []
    for a, b in (tuple(p) for p in cfg.comparisons):
        raw = json.loads(_require(cfg.path(f"eval_{a}_vs_{b}.json"), "interleave"))
        if raw.get("version") != ARTIFACT_VERSION:
            raise StageError(f"eval artifact for {a} vs {b} has wrong version")
        outcomes.append((a, b, PairEvalResult(
            wins_a=raw["wins_a"], wins_b=raw["wins_b"], ties=raw["ties"],
            impressions=raw["impressions"],
        )))
    report, text = make_report(outcomes)
    _write_artifact(cfg.path("report.json"),
                    json.dumps(report, sort_keys=True, separators=(",", ":")),
                    {"stage": "report"})
    return report, text


STAGES = {
    "index": stage_index,
    "simulate": stage_simulate,
    "chains": stage_chains,
    "prefs": stage_prefs,
    "train": stage_train,
    "rerank": stage_rerank,
    "interleave": stage_interleave,
    "report": stage_report,
}


def run_stage(name: str, cfg: ExperimentConfig, **kwargs):
    """Dispatch one named stage; unknown names raise StageError."""
    if name not in STAGES:
        raise StageError(f"unknown stage {name!r}; expected one of {sorted(STAGES)}")
    return STAGES[name](cfg, **kwargs)
