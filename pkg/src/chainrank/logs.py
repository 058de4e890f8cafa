"""Canonical query/click log schema, JSON-lines persistence, session grouping.

Wire format is one JSON object per line, UTF-8, LF line endings:

    {"type":"query","qid":...,"session":...,"t":...,"terms":[...],
     "results":[{"doc":...,"abstract":...}, ...]}
    {"type":"click","qid":...,"doc":...,"rank":...,"t":...}

Field order is canonical, so `write_log` is byte-deterministic and
`parse_log(write_log(log)) == log`.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Union

from .errors import DataError, LogParseError

MAX_RESULTS = 100


@dataclass
class QueryEvent:
    query_id: str
    session_id: str
    timestamp: int
    terms: list[str]
    results: list[tuple[str, str]] = field(default_factory=list)  # (doc_id, abstract)

    def __post_init__(self):
        if self.timestamp < 0:
            raise DataError(f"query {self.query_id}: negative timestamp")
        if len(self.results) > MAX_RESULTS:
            raise DataError(f"query {self.query_id}: more than {MAX_RESULTS} results")
        docs = [d for d, _ in self.results]
        if len(set(docs)) != len(docs):
            raise DataError(f"query {self.query_id}: duplicate doc in results")

    def result_docs(self) -> list[str]:
        return [d for d, _ in self.results]


@dataclass
class ClickEvent:
    query_id: str
    doc_id: str
    rank: int
    timestamp: int


Event = Union[QueryEvent, ClickEvent]


@dataclass
class SearchLog:
    """Time-ordered interleaved stream of query and click events."""

    events: list[Event] = field(default_factory=list)

    def queries(self) -> dict[str, QueryEvent]:
        return {e.query_id: e for e in self.events if isinstance(e, QueryEvent)}

    def clicks_for(self, query_id: str) -> list[ClickEvent]:
        return [
            e for e in self.events if isinstance(e, ClickEvent) and e.query_id == query_id
        ]

    def __len__(self) -> int:
        return len(self.events)


def _check_click(click: ClickEvent, query: QueryEvent, line_no: int | None = None) -> None:
    where = f" (line {line_no})" if line_no is not None else ""
    docs = query.result_docs()
    if not 1 <= click.rank <= len(docs):
        raise DataError(
            f"click on {click.doc_id}{where}: rank {click.rank} outside results of "
            f"query {query.query_id}"
        )
    if docs[click.rank - 1] != click.doc_id:
        raise DataError(
            f"click{where}: doc {click.doc_id} is not at rank {click.rank} of "
            f"query {query.query_id}"
        )


def validate_log(log: SearchLog) -> None:
    """Check referential integrity and per-session timestamp order."""
    queries: dict[str, QueryEvent] = {}
    last_t: dict[str, int] = {}
    for ev in log.events:
        if isinstance(ev, QueryEvent):
            session = ev.session_id
            queries[ev.query_id] = ev
        else:
            q = queries.get(ev.query_id)
            if q is None:
                raise DataError(f"click references unknown query_id {ev.query_id}")
            _check_click(ev, q)
            session = q.session_id
        if ev.timestamp < last_t.get(session, 0):
            raise DataError(f"timestamps decrease within session {session}")
        last_t[session] = ev.timestamp


def parse_log(stream: Union[str, bytes, Iterable[str]]) -> SearchLog:
    """Parse a JSON-lines log. Malformed lines raise LogParseError with the line number."""
    if isinstance(stream, bytes):
        stream = stream.decode("utf-8")
    if isinstance(stream, str):
        lines = stream.splitlines()
    else:
        lines = [ln.rstrip("\n") for ln in stream]

    events: list[Event] = []
    queries: dict[str, QueryEvent] = {}
    for line_no, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            rec = json.loads(line)
        except json.JSONDecodeError as exc:
            raise LogParseError(line_no, f"invalid JSON ({exc.msg} at col {exc.colno})")
        try:
            kind = rec["type"]
            if kind == "query":
                ev = QueryEvent(
                    query_id=rec["qid"],
                    session_id=rec["session"],
                    timestamp=int(rec["t"]),
                    terms=list(rec["terms"]),
                    results=[(r["doc"], r["abstract"]) for r in rec["results"]],
                )
                queries[ev.query_id] = ev
            elif kind == "click":
                ev = ClickEvent(
                    query_id=rec["qid"],
                    doc_id=rec["doc"],
                    rank=int(rec["rank"]),
                    timestamp=int(rec["t"]),
                )
                q = queries.get(ev.query_id)
                if q is None:
                    raise DataError(
                        f"line {line_no}: click references unknown query_id {ev.query_id}"
                    )
                _check_click(ev, q, line_no)
            else:
                raise LogParseError(line_no, f"unknown record type {kind!r}")
        except (KeyError, TypeError, ValueError) as exc:
            raise LogParseError(line_no, f"bad record: {exc}") from exc
        events.append(ev)

    log = SearchLog(events)
    validate_log(log)
    return log


def write_log(log: SearchLog) -> str:
    """Serialize to canonical JSON-lines. parse_log(write_log(x)) == x."""
    out = []
    for ev in log.events:
        if isinstance(ev, QueryEvent):
            rec = {
                "type": "query",
                "qid": ev.query_id,
                "session": ev.session_id,
                "t": ev.timestamp,
                "terms": ev.terms,
                "results": [{"doc": d, "abstract": a} for d, a in ev.results],
            }
        else:
            rec = {
                "type": "click",
                "qid": ev.query_id,
                "doc": ev.doc_id,
                "rank": ev.rank,
                "t": ev.timestamp,
            }
        out.append(json.dumps(rec, ensure_ascii=False, separators=(",", ":")))
    return "".join(line + "\n" for line in out)


def group_sessions(log: SearchLog) -> dict[str, list[Event]]:
    """Partition events by session, preserving within-session stream order.

    Clicks belong to the session of the query they reference.
    """
    queries = log.queries()
    groups: dict[str, list[Event]] = {}
    for ev in log.events:
        session = ev.session_id if isinstance(ev, QueryEvent) else queries[ev.query_id].session_id
        groups.setdefault(session, []).append(ev)
    return groups
