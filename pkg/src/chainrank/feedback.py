"""Relative preference judgments mined from clicks, within and across queries.

Six strategies turn a query chain into "doc A is preferred over doc B for
query q" statements:

  S1  clicked doc beats every unclicked doc ranked above it (same query)
  S2  clicked first result beats an unclicked second result (same query)
  S3  like S1, but the judgment is relative to the immediately preceding query
  S4  like S2, relative to the immediately preceding query
  S5  a clicked doc beats the unclicked docs a user plausibly viewed in an
      earlier query of the chain that received clicks: ranks 1 through one
      past its last clicked rank
  S6  a clicked doc beats the top two results of an earlier query of the
      chain that received no clicks

S3/S4 look only at the immediate predecessor; S5/S6 pair each clicking query
with every earlier query in its chain.  When an earlier query has fewer
results than S5/S6 need, random corpus documents stand in as if ranked at
the end of its results; draws come from a generator seeded per chain, so
output is reproducible and independent of chain processing order.

Duplicate judgments are kept: the output is a multiset, canonically ordered
by (chain, strategy, generation order).
"""

from __future__ import annotations

import hashlib
import json
from collections import Counter
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .chains import QueryChain
from .errors import DataError
from .logs import ClickEvent, QueryEvent, SearchLog


class Strategy(str, Enum):
    CLICK_SKIP_ABOVE = "S1"
    CLICK_FIRST_NO_CLICK_SECOND = "S2"
    CLICK_SKIP_ABOVE_PREV_QUERY = "S3"
    CLICK_FIRST_NO_CLICK_SECOND_PREV_QUERY = "S4"
    CLICK_SKIP_EARLIER_QUERY = "S5"
    CLICK_TOP_TWO_EARLIER_QUERY = "S6"


WITHIN_QUERY_STRATEGIES = (Strategy.CLICK_SKIP_ABOVE, Strategy.CLICK_FIRST_NO_CLICK_SECOND)


@dataclass(frozen=True)
class Preference:
    """preferred_doc beats other_doc with respect to wrt_query."""

    preferred_doc: str
    other_doc: str
    wrt_query: str
    strategy: Strategy
    chain_id: str = ""

    def __post_init__(self):
        if self.preferred_doc == self.other_doc:
            raise DataError(f"self-preference on {self.preferred_doc}")


def prefs_within_query(
    q: QueryEvent, clicks: list[ClickEvent], chain_id: str = ""
) -> list[Preference]:
    """S1 and S2 for a single query. No clicks means no output."""
    docs = q.result_docs()
    clicked_ranks = {c.rank for c in clicks}
    out: list[Preference] = []
    for c in clicks:
        for rank_above in range(1, c.rank):
            if rank_above not in clicked_ranks:
                out.append(
                    Preference(c.doc_id, docs[rank_above - 1], q.query_id,
                               Strategy.CLICK_SKIP_ABOVE, chain_id)
                )
    if 1 in clicked_ranks and 2 not in clicked_ranks and len(docs) >= 2:
        out.append(
            Preference(docs[0], docs[1], q.query_id,
                       Strategy.CLICK_FIRST_NO_CLICK_SECOND, chain_id)
        )
    return out


def _earlier_query_targets(
    q_earlier: QueryEvent, clicks_earlier: list[ClickEvent]
) -> tuple[Strategy, list[str], int]:
    """Unclicked target docs in the earlier query, plus how many pads are owed."""
    docs = q_earlier.result_docs()
    if clicks_earlier:
        last = max(c.rank for c in clicks_earlier)
        clicked = {c.doc_id for c in clicks_earlier}
        region = docs[: last + 1]  # viewed region: ranks 1..last+1
        targets = [d for d in region if d not in clicked]
        n_pad = 1 if last == len(docs) else 0
        return Strategy.CLICK_SKIP_EARLIER_QUERY, targets, n_pad
    targets = docs[:2]
    return Strategy.CLICK_TOP_TWO_EARLIER_QUERY, targets, max(0, 2 - len(docs))


def _draw_pad(rng: np.random.Generator, pool: list[str], excluded: set[str]) -> str | None:
    """Uniform draw from the pool minus excluded ids; None when impossible."""
    if not pool:
        return None
    if len(excluded) >= len(pool):
        allowed = [d for d in pool if d not in excluded]
        return allowed[int(rng.integers(len(allowed)))] if allowed else None
    while True:
        d = pool[int(rng.integers(len(pool)))]
        if d not in excluded:
            return d


def prefs_cross_query(
    chain: QueryChain,
    padding_pool: list[str] | None = None,
    rng: np.random.Generator | None = None,
    top_two_clicked_variant: bool = False,
) -> list[Preference]:
    """S3-S6 for one chain.

    `padding_pool` is the corpus doc-id universe used for stand-in documents;
    without it, judgments that would need padding are simply not emitted.
    `top_two_clicked_variant` additionally emits S6-style judgments against
    the top two results of earlier queries that did receive clicks, skipping
    the clicked ones.
    """
    rng = rng if rng is not None else np.random.default_rng(0)
    pool = sorted(padding_pool) if padding_pool else []
    out: list[Preference] = []
    for i, q in enumerate(chain.queries):
        clicks_q = chain.clicks[i]
        if not clicks_q:
            continue
        clicked_docs = [c.doc_id for c in clicks_q]

        if i >= 1:
            prev_qid = chain.queries[i - 1].query_id
            docs = q.result_docs()
            clicked_ranks = {c.rank for c in clicks_q}
            for c in clicks_q:
                for rank_above in range(1, c.rank):
                    if rank_above not in clicked_ranks:
                        out.append(
                            Preference(c.doc_id, docs[rank_above - 1], prev_qid,
                                       Strategy.CLICK_SKIP_ABOVE_PREV_QUERY, chain.chain_id)
                        )
            if 1 in clicked_ranks and 2 not in clicked_ranks and len(docs) >= 2:
                out.append(
                    Preference(docs[0], docs[1], prev_qid,
                               Strategy.CLICK_FIRST_NO_CLICK_SECOND_PREV_QUERY, chain.chain_id)
                )

        for j in range(i):
            q_e = chain.queries[j]
            strategy, targets, n_pad = _earlier_query_targets(q_e, chain.clicks[j])
            variant_targets: list[str] = []
            if top_two_clicked_variant and strategy is Strategy.CLICK_SKIP_EARLIER_QUERY:
                clicked_e = {c.doc_id for c in chain.clicks[j]}
                variant_targets = [d for d in q_e.result_docs()[:2] if d not in clicked_e]
            for cd in clicked_docs:
                for t in targets:
                    if t != cd:
                        out.append(Preference(cd, t, q_e.query_id, strategy, chain.chain_id))
                for _ in range(n_pad):
                    pad = _draw_pad(rng, pool, set(q_e.result_docs()) | {cd})
                    if pad is not None:
                        out.append(Preference(cd, pad, q_e.query_id, strategy, chain.chain_id))
                for t in variant_targets:
                    if t != cd:
                        out.append(
                            Preference(cd, t, q_e.query_id,
                                       Strategy.CLICK_TOP_TWO_EARLIER_QUERY, chain.chain_id)
                        )
    return out


def _chain_rng(seed: int, chain_id: str) -> np.random.Generator:
    digest = hashlib.sha256(chain_id.encode("utf-8")).digest()
    return np.random.default_rng([seed, int.from_bytes(digest[:8], "big")])


def prefs_for_log(
    log: SearchLog,
    chains: list[QueryChain],
    mode: str = "qc",
    padding_pool: list[str] | None = None,
    seed: int = 0,
    top_two_clicked_variant: bool = False,
) -> list[Preference]:
    """All preferences for a log. mode "nc" keeps S1/S2 only; "qc" adds S3-S6.

    The S1/S2 subset is identical across modes, so the "nc" output is always
    contained in the "qc" output for the same seed.
    """
    mode = mode.lower()
    if mode not in ("qc", "nc"):
        raise DataError(f"mode must be 'qc' or 'nc', got {mode!r}")
    out: list[Preference] = []
    for chain in sorted(chains, key=lambda c: c.chain_id):
        for i, q in enumerate(chain.queries):
            out.extend(prefs_within_query(q, chain.clicks[i], chain.chain_id))
        if mode == "qc":
            out.extend(
                prefs_cross_query(
                    chain,
                    padding_pool=padding_pool,
                    rng=_chain_rng(seed, chain.chain_id),
                    top_two_clicked_variant=top_two_clicked_variant,
                )
            )
    out.sort(key=lambda p: (p.chain_id, p.strategy.value))
    return out


def strategy_counts(prefs: list[Preference]) -> dict[str, int]:
    counts = Counter(p.strategy.value for p in prefs)
    return {s.value: counts.get(s.value, 0) for s in Strategy}


def write_preferences(prefs: list[Preference]) -> str:
    """JSON-lines: {"pref":...,"over":...,"wrt":...,"strategy":"S1".."S6","chain":...}."""
    lines = [
        json.dumps(
            {"pref": p.preferred_doc, "over": p.other_doc, "wrt": p.wrt_query,
             "strategy": p.strategy.value, "chain": p.chain_id},
            ensure_ascii=False,
            separators=(",", ":"),
        )
        for p in prefs
    ]
    return "".join(line + "\n" for line in lines)


def read_preferences(text: str) -> list[Preference]:
    out = []
    for i, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            rec = json.loads(line)
            out.append(
                Preference(rec["pref"], rec["over"], rec["wrt"],
                           Strategy(rec["strategy"]), rec["chain"])
            )
        except (json.JSONDecodeError, KeyError, ValueError) as exc:
            raise DataError(f"preferences line {i}: {exc}") from exc
    return out
