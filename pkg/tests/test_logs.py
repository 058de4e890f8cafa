import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from chainrank.errors import DataError, LogParseError
from chainrank.logs import (
    ClickEvent,
    QueryEvent,
    SearchLog,
    group_sessions,
    parse_log,
    write_log,
)
from helpers import make_click, make_query


def test_empty_stream():
    assert parse_log("").events == []
    assert write_log(SearchLog([])) == ""


def test_query_plus_click():
    q = make_query("q1", "s1", 10, ["rare", "books"], ["d1", "d2"])
    log = SearchLog([q, make_click(q, 2, 12)])
    text = write_log(log)
    parsed = parse_log(text)
    assert len(parsed) == 2
    click = parsed.events[1]
    assert isinstance(click, ClickEvent)
    assert (click.doc_id, click.rank) == ("d2", 2)


def test_canonical_field_order_and_bytes():
    q = make_query("q1", "s1", 10, ["a"], ["d1"], abstracts=["snippet"])
    log = SearchLog([q, make_click(q, 1, 11)])
    text = write_log(log)
    assert text.splitlines()[0] == (
        '{"type":"query","qid":"q1","session":"s1","t":10,"terms":["a"],'
        '"results":[{"doc":"d1","abstract":"snippet"}]}'
    )
    assert text.splitlines()[1] == '{"type":"click","qid":"q1","doc":"d1","rank":1,"t":11}'
    assert write_log(log) == text  # byte-identical across calls


def _fixture_log(n_queries=25):
    events = []
    for i in range(n_queries):
        session = f"s{i % 3}"
        q = make_query(f"q{i}", session, 100 * i + (i % 3), ["term", f"t{i}"],
                       [f"d{i}a", f"d{i}b", f"d{i}c"])
        events.append(q)
        events.append(make_click(q, 1 + i % 3, q.timestamp + 1))
    return SearchLog(events)


def test_round_trip_50_records():
    log = _fixture_log()
    assert len(log) == 50
    text = write_log(log)
    assert parse_log(text) == log
    assert write_log(parse_log(text)) == text


def test_write_parse_canonicalizes_whitespace():
    q = make_query("q1", "s1", 10, ["a"], ["d1"])
    messy = '{"type": "query", "results": [{"abstract": "abstract for d1", "doc": "d1"}], ' \
            '"qid": "q1", "session": "s1", "t": 10, "terms": ["a"]}\n'
    canon = write_log(parse_log(messy))
    assert canon == write_log(SearchLog([q]))
    assert write_log(parse_log(canon)) == canon  # idempotent on second pass


def test_malformed_json_reports_line():
    q = make_query("q1", "s1", 10, ["a"], ["d1"])
    text = write_log(SearchLog([q])) + "{not json\n"
    with pytest.raises(LogParseError, match="line 2"):
        parse_log(text)


def test_click_unknown_query_is_structural_error():
    with pytest.raises(DataError, match="unknown query_id"):
        parse_log('{"type":"click","qid":"nope","doc":"d","rank":1,"t":0}\n')


def test_click_rank_inconsistent():
    q = make_query("q1", "s1", 10, ["a"], ["d1", "d2"])
    text = write_log(SearchLog([q]))
    text += '{"type":"click","qid":"q1","doc":"d1","rank":2,"t":11}\n'
    with pytest.raises(DataError, match="rank 2"):
        parse_log(text)


def test_decreasing_timestamps_rejected():
    q1 = make_query("q1", "s1", 100, ["a"], ["d1"])
    q2 = make_query("q2", "s1", 50, ["b"], ["d2"])
    with pytest.raises(DataError, match="decrease"):
        parse_log(write_log(SearchLog([q1, q2])))


def test_unknown_record_type():
    with pytest.raises(LogParseError, match="unknown record type"):
        parse_log('{"type":"visit","qid":"q"}\n')


def test_too_many_results_rejected():
    docs = [f"d{i}" for i in range(101)]
    with pytest.raises(DataError, match="more than 100"):
        make_query("q", "s", 0, ["a"], docs)


def test_group_sessions_single():
    log = SearchLog([make_query("q1", "s1", 0, ["a"], ["d1"])])
    groups = group_sessions(log)
    assert list(groups) == ["s1"]
    assert groups["s1"] == log.events


def test_group_sessions_interleaved_partition():
    qa = make_query("qa", "sa", 0, ["a"], ["d1"])
    qb = make_query("qb", "sb", 1, ["b"], ["d2"])
    ca = make_click(qa, 1, 2)
    cb = make_click(qb, 1, 3)
    log = SearchLog([qa, qb, ca, cb])
    groups = group_sessions(log)
    # brute-force partition: every event in exactly one group
    assert sorted(groups) == ["sa", "sb"]
    assert groups["sa"] == [qa, ca]
    assert groups["sb"] == [qb, cb]
    total = sum(len(v) for v in groups.values())
    assert total == len(log)


@settings(max_examples=100, deadline=None)
@given(data=st.data())
def test_group_sessions_stable_under_session_preserving_shuffle(data):
    # build two sessions then interleave them in a random order
    per_session = {}
    for sid in ("s0", "s1"):
        events = []
        t = 0
        for i in range(data.draw(st.integers(1, 4), label=f"n_{sid}")):
            q = make_query(f"{sid}q{i}", sid, t, ["w"], [f"{sid}d{i}"])
            events.append(q)
            if data.draw(st.booleans(), label=f"click_{sid}_{i}"):
                events.append(make_click(q, 1, t + 1))
            t += 10
        per_session[sid] = events
    merged = []
    cursors = {sid: 0 for sid in per_session}
    while any(cursors[s] < len(per_session[s]) for s in per_session):
        live = [s for s in per_session if cursors[s] < len(per_session[s])]
        sid = data.draw(st.sampled_from(live), label="pick")
        merged.append(per_session[sid][cursors[sid]])
        cursors[sid] += 1
    groups = group_sessions(SearchLog(merged))
    for sid, events in per_session.items():
        assert groups[sid] == events
