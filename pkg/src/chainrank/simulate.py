"""Behavioral click simulator with known ground truth.

Synthetic users pursue an information need (an Intent) by walking a scripted
sequence of query reformulations against a live ranker.  Scanning is strictly
top-down: the first result is always assessed, the second when
`min_view_top2` is set, later ones with probability `scan_persistence`, and
the result just below a click is always assessed when `view_one_below_click`
is set.  A viewed document is clicked with probability

    relevance * (1 - noise) + (1 - relevance) * noise

so at zero noise and binary relevance grades, clicks identify exactly the
relevant viewed documents.  The same confusion rate applies to the user's
read of a clicked page: a session ends once some clicked document is judged
relevant (truly relevant with probability 1 - noise, irrelevant with
probability noise), or when the script is abandoned.

Every query is recorded with its presented results, and a sidecar stream
maps each query to its intent and true relevance grades, so chain detection,
preference strategies, and interleaved evaluation can all be scored against
ground truth.  Sessions derive independent generators from (seed, session
index): generation order cannot change the output.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .corpus import Corpus, RankedList
from .errors import DataError
from .feedback import Preference
from .interleave import attribute, combine
from .logs import ClickEvent, QueryEvent, SearchLog

Ranker = Callable[[list[str], int], RankedList]

SESSION_GAP_SECONDS = 86400  # distinct sessions sit at least a day apart


@dataclass(frozen=True)
class Intent:
    """One information need: graded relevant docs and a reformulation script."""

    intent_id: str
    relevant_docs: dict[str, float]
    query_script: tuple[tuple[str, ...], ...]

    def __post_init__(self):
        if not self.query_script:
            raise DataError(f"intent {self.intent_id}: empty query script")
        for grade in self.relevant_docs.values():
            if not 0.0 <= grade <= 1.0:
                raise DataError(f"intent {self.intent_id}: grade {grade} outside [0,1]")

    def grade(self, doc_id: str) -> float:
        return self.relevant_docs.get(doc_id, 0.0)


@dataclass(frozen=True)
class UserBehavior:
    scan_persistence: float = 0.85
    click_noise: float = 0.0
    min_view_top2: bool = True
    view_one_below_click: bool = True
    reformulate_prob: float = 0.95
    min_gap_seconds: int = 5
    max_gap_seconds: int = 300

    def __post_init__(self):
        for name in ("scan_persistence", "click_noise", "reformulate_prob"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise DataError(f"{name} must be in [0,1], got {v}")
        if not 0 < self.min_gap_seconds <= self.max_gap_seconds:
            raise DataError("need 0 < min_gap_seconds <= max_gap_seconds")


@dataclass
class TruthRecord:
    """Sidecar entry: which intent a query served and its true relevance map."""

    query_id: str
    intent_id: str
    relevance: dict[str, float]


def scan_and_click(
    grades: list[float], behavior: UserBehavior, rng: np.random.Generator
) -> list[int]:
    """Simulate one top-down scan; returns clicked 0-based positions in order."""
    eps = behavior.click_noise
    clicked: list[int] = []
    for i in range(len(grades)):
        if i == 0:
            pass  # the first result is always assessed
        else:
            forced = (i == 1 and behavior.min_view_top2) or (
                behavior.view_one_below_click and clicked and clicked[-1] == i - 1
            )
            if not forced and rng.random() >= behavior.scan_persistence:
                break
        p_click = grades[i] * (1.0 - eps) + (1.0 - grades[i]) * eps
        if rng.random() < p_click:
            clicked.append(i)
    return clicked


def _abstract(corpus: Corpus, doc_id: str) -> str:
    doc = corpus.documents[doc_id]
    return f"{doc.title}: {doc.body[:100]}"


def _satisfied(
    intent: Intent, clicked_docs: list[str], behavior: UserBehavior,
    rng: np.random.Generator,
) -> bool:
    """Noisy page-read judgment: the clicked doc looks relevant with the same
    confusion rate that governs clicking."""
    eps = behavior.click_noise
    for doc in clicked_docs:
        truly = intent.grade(doc) >= 0.5
        p_looks_relevant = (1.0 - eps) if truly else eps
        if rng.random() < p_looks_relevant:
            return True
    return False


def simulate(
    corpus: Corpus,
    ranker: Ranker,
    intents: list[Intent],
    behavior: UserBehavior,
    n_sessions: int,
    seed: int,
    results_per_query: int = 10,
    multi_intent_prob: float = 0.0,
    intent_gap: tuple[int, int] = (1900, 3600),
    session_gap: int = SESSION_GAP_SECONDS,
) -> tuple[SearchLog, list[TruthRecord]]:
    """Generate a log plus ground-truth sidecar; byte-deterministic per seed.

    Sessions cycle through the intents.  With probability `multi_intent_prob`
    a session continues with another information need (never one it already
    pursued, so the intent id is a valid chain label) after a pause drawn
    from `intent_gap`; keep that gap above the chain window to leave
    heuristic segmentation exact, or below it to study its errors.
    """
    if n_sessions < 0:
        raise DataError("n_sessions must be non-negative")
    if not intents and n_sessions > 0:
        raise DataError("need at least one intent")
    events = []
    truth: list[TruthRecord] = []
    for s in range(n_sessions):
        rng = np.random.default_rng([seed, s])
        session_id = f"s{s:06d}"
        t = s * session_gap
        intent_idx = s % len(intents)
        used = {intent_idx}
        n_queries = 0
        while True:
            intent = intents[intent_idx]
            for qi, terms in enumerate(intent.query_script):
                qid = f"{session_id}q{n_queries}"
                n_queries += 1
                ranking = ranker(list(terms), results_per_query)
                results = [(e.doc_id, _abstract(corpus, e.doc_id)) for e in ranking.entries]
                events.append(QueryEvent(qid, session_id, t, list(terms), results))
                truth.append(TruthRecord(qid, intent.intent_id, dict(intent.relevant_docs)))
                grades = [intent.grade(d) for d, _ in results]
                clicked = scan_and_click(grades, behavior, rng)
                for pos in clicked:
                    t += 1
                    events.append(ClickEvent(qid, results[pos][0], pos + 1, t))
                if _satisfied(intent, [results[p][0] for p in clicked], behavior, rng):
                    break
                if qi < len(intent.query_script) - 1:
                    if rng.random() >= behavior.reformulate_prob:
                        break
                    t += int(rng.integers(behavior.min_gap_seconds,
                                          behavior.max_gap_seconds + 1))
            unused = [i for i in range(len(intents)) if i not in used]
            if unused and rng.random() < multi_intent_prob:
                intent_idx = unused[int(rng.integers(len(unused)))]
                used.add(intent_idx)
                t += int(rng.integers(intent_gap[0], intent_gap[1] + 1))
            else:
                break
    return SearchLog(events), truth


@dataclass
class StrategyAccuracy:
    agreements: int = 0
    disagreements: int = 0

    @property
    def strict_pairs(self) -> int:
        return self.agreements + self.disagreements

    @property
    def accuracy(self) -> float | None:
        """None when no strict ground-truth pair was seen (no data)."""
        if not self.strict_pairs:
            return None
        return self.agreements / self.strict_pairs


def strategy_accuracy(
    preferences: list[Preference], truth: list[TruthRecord] | dict[str, TruthRecord]
) -> dict[str, StrategyAccuracy]:
    """Score each strategy against ground truth, skipping equal-relevance pairs."""
    if not isinstance(truth, dict):
        truth = {rec.query_id: rec for rec in truth}
    out: dict[str, StrategyAccuracy] = {}
    for p in preferences:
        rec = truth.get(p.wrt_query)
        if rec is None:
            raise DataError(f"no ground truth for query {p.wrt_query}")
        acc = out.setdefault(p.strategy.value, StrategyAccuracy())
        ga = rec.relevance.get(p.preferred_doc, 0.0)
        gb = rec.relevance.get(p.other_doc, 0.0)
        if ga > gb:
            acc.agreements += 1
        elif ga < gb:
            acc.disagreements += 1
    return out


@dataclass
class PairEvalResult:
    """Interleaved comparison outcome over simulated sessions (per query)."""

    wins_a: int = 0
    wins_b: int = 0
    ties: int = 0
    impressions: int = 0


def interleaved_eval(
    ranker_a: Ranker,
    ranker_b: Ranker,
    intents: list[Intent],
    behavior: UserBehavior,
    n_sessions: int,
    seed: int,
    results_per_query: int = 10,
) -> PairEvalResult:
    """Present combined rankings to simulated users and tally per-query winners.

    The leading side is drawn once per session (the user keeps one blend for
    the whole session) from the same derived generator as everything else.
    """
    result = PairEvalResult()
    for s in range(n_sessions):
        rng = np.random.default_rng([seed, s])
        a_first = bool(rng.random() < 0.5)  # session-sticky coin
        intent = intents[s % len(intents)]
        for terms in intent.query_script:
            ra = ranker_a(list(terms), results_per_query)
            rb = ranker_b(list(terms), results_per_query)
            inter = combine(ra.doc_ids(), rb.doc_ids(), first_r=a_first)
            shown = inter.combined[:results_per_query]
            grades = [intent.grade(d) for d in shown]
            clicked_pos = scan_and_click(grades, behavior, rng)
            clicked_docs = {shown[p] for p in clicked_pos}
            att = attribute(inter, clicked_docs)
            result.impressions += 1
            if att.winner == "r":
                result.wins_a += 1
            elif att.winner == "r_prime":
                result.wins_b += 1
            else:
                result.ties += 1
            if _satisfied(intent, sorted(clicked_docs), behavior, rng):
                break
    return result


def write_truth(records: list[TruthRecord]) -> str:
    """Sidecar JSON-lines: {"qid":...,"intent":...,"relevance":{doc:grade}}."""
    lines = [
        json.dumps(
            {"qid": r.query_id, "intent": r.intent_id,
             "relevance": {d: r.relevance[d] for d in sorted(r.relevance)}},
            ensure_ascii=False,
            separators=(",", ":"),
        )
        for r in records
    ]
    return "".join(line + "\n" for line in lines)


def read_truth(text: str) -> list[TruthRecord]:
    out = []
    for i, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            rec = json.loads(line)
            out.append(TruthRecord(rec["qid"], rec["intent"], dict(rec["relevance"])))
        except (json.JSONDecodeError, KeyError) as exc:
            raise DataError(f"truth line {i}: {exc}") from exc
    return out


def write_intents(intents: list[Intent]) -> str:
    payload = {
        "version": 1,
        "intents": [
            {
                "intent_id": it.intent_id,
                "relevant_docs": {d: it.relevant_docs[d] for d in sorted(it.relevant_docs)},
                "query_script": [list(q) for q in it.query_script],
            }
            for it in intents
        ],
    }
    return json.dumps(payload, ensure_ascii=False, sort_keys=True, separators=(",", ":"))


def read_intents(text: str) -> list[Intent]:
    payload = json.loads(text)
    if payload.get("version") != 1:
        raise DataError(f"intent file version mismatch: {payload.get('version')}")
    return [
        Intent(
            intent_id=rec["intent_id"],
            relevant_docs=dict(rec["relevant_docs"]),
            query_script=tuple(tuple(q) for q in rec["query_script"]),
        )
        for rec in payload["intents"]
    ]
