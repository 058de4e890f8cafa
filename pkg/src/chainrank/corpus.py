"""Document corpus, inverted index, and the baseline retrieval function.

The baseline scorer is a tf-idf cosine variant: ln-scaled term frequencies,
smoothed idf, title tokens counted twice, and scores normalized by the
document vector norm only.  Dropping the query-norm constant does not change
the ranking for a fixed query and keeps scores monotone in added matching
query terms.
"""

from __future__ import annotations

import json
import math
import re
from collections import Counter
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

from .errors import DataError

INDEX_VERSION = 1
DEFAULT_K = 100

_TOKEN_SPLIT = re.compile(r"[^0-9a-z]+")


def tokenize(text: str) -> list[str]:
    """Lowercase and split on non-alphanumeric runs. No stemming, no stopwords."""
    return [t for t in _TOKEN_SPLIT.split(text.lower()) if t]


@dataclass
class Document:
    """One indexed document. `tokens` is derived from title + body."""

    doc_id: str
    title: str
    body: str

    @cached_property
    def title_tokens(self) -> list[str]:
        return tokenize(self.title)

    @cached_property
    def body_tokens(self) -> list[str]:
        return tokenize(self.body)

    @cached_property
    def tokens(self) -> list[str]:
        return self.title_tokens + self.body_tokens


@dataclass
class RankEntry:
    doc_id: str
    score: float
    rank: int


@dataclass
class RankedList:
    """Ordered retrieval result: consecutive 1-based ranks, non-increasing scores."""

    query_id: str
    entries: list[RankEntry]

    def __post_init__(self):
        seen = set()
        for i, e in enumerate(self.entries):
            if e.rank != i + 1:
                raise DataError(f"ranks must be consecutive from 1, got {e.rank} at {i}")
            if i and e.score > self.entries[i - 1].score:
                raise DataError("scores must be non-increasing")
            if e.doc_id in seen:
                raise DataError(f"duplicate doc_id in ranking: {e.doc_id}")
            seen.add(e.doc_id)

    @classmethod
    def from_scored(cls, query_id: str, scored: list[tuple[str, float]]) -> "RankedList":
        """Build from (doc_id, score) pairs, sorting by score desc then doc_id asc."""
        ordered = sorted(scored, key=lambda p: (-p[1], p[0]))
        return cls(query_id, [RankEntry(d, s, i + 1) for i, (d, s) in enumerate(ordered)])

    def doc_ids(self) -> list[str]:
        return [e.doc_id for e in self.entries]

    def rank_of(self, doc_id: str) -> int | None:
        for e in self.entries:
            if e.doc_id == doc_id:
                return e.rank
        return None

    def __len__(self) -> int:
        return len(self.entries)


class Corpus:
    """Immutable document collection with an inverted index.

    `postings[term]` holds (doc_id, raw term frequency) pairs sorted by
    doc_id, where the raw frequency counts occurrences in title + body.
    Scoring structures (idf, doubled-title weights, document norms) are
    precomputed at build time.  Instances are safe for concurrent reads.
    """

    def __init__(self, documents: list[Document]):
        self.documents: dict[str, Document] = {}
        for doc in sorted(documents, key=lambda d: d.doc_id):
            if doc.doc_id in self.documents:
                raise DataError(f"duplicate doc_id: {doc.doc_id}")
            self.documents[doc.doc_id] = doc

        postings: dict[str, list[tuple[str, int]]] = {}
        weighted: dict[str, dict[str, int]] = {}
        for doc in self.documents.values():
            raw = Counter(doc.tokens)
            title = Counter(doc.title_tokens)
            for term, n in raw.items():
                postings.setdefault(term, []).append((doc.doc_id, n))
                # title tokens weighted double: raw count + one extra per title hit
                weighted.setdefault(term, {})[doc.doc_id] = n + title.get(term, 0)
        self.postings = {t: postings[t] for t in sorted(postings)}
        self.vocabulary = set(self.postings)

        n_docs = len(self.documents)
        self._idf = {
            t: 1.0 + math.log((1 + n_docs) / (1 + len(plist)))
            for t, plist in self.postings.items()
        }
        self._weighted = weighted
        self._norms: dict[str, float] = {}
        for doc_id, doc in self.documents.items():
            acc = 0.0
            for term in sorted(set(doc.tokens)):
                w = (1.0 + math.log(weighted[term][doc_id])) * self._idf[term]
                acc += w * w
            self._norms[doc_id] = math.sqrt(acc)

    def __len__(self) -> int:
        return len(self.documents)

    def doc_ids(self) -> list[str]:
        return list(self.documents)

    def idf(self, term: str) -> float:
        return self._idf.get(term, 1.0 + math.log(1 + len(self.documents)))

    def doc_weight(self, term: str, doc_id: str) -> float:
        wtf = self._weighted.get(term, {}).get(doc_id)
        if wtf is None:
            return 0.0
        return (1.0 + math.log(wtf)) * self._idf[term]

    def doc_norm(self, doc_id: str) -> float:
        return self._norms[doc_id]


def build_index(documents: list[Document]) -> Corpus:
    """Build an index; rejects duplicate doc_ids. Deterministic for a given input set."""
    return Corpus(documents)


def base_retrieve(
    corpus: Corpus, query_terms: list[str], k: int = DEFAULT_K, query_id: str = ""
) -> RankedList:
    """Rank documents containing at least one query term by the tf-idf baseline.

    Empty queries and queries matching nothing yield an empty list. Ties
    break by doc_id ascending.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    counts = Counter(t for t in query_terms if t)
    scores: dict[str, float] = {}
    for term in sorted(counts):
        plist = corpus.postings.get(term)
        if not plist:
            continue
        q_w = (1.0 + math.log(counts[term])) * corpus.idf(term)
        for doc_id, _ in plist:
            scores[doc_id] = scores.get(doc_id, 0.0) + q_w * corpus.doc_weight(term, doc_id)
    scored = [(d, s / corpus.doc_norm(d)) for d, s in sorted(scores.items())]
    scored.sort(key=lambda p: (-p[1], p[0]))
    return RankedList(
        query_id,
        [RankEntry(d, s, i + 1) for i, (d, s) in enumerate(scored[:k])],
    )


def save_index(corpus: Corpus, path: str | Path) -> None:
    """Persist as versioned JSON; round-trips byte-exactly through load + save."""
    payload = {
        "version": INDEX_VERSION,
        "documents": [
            {"doc_id": d.doc_id, "title": d.title, "body": d.body}
            for d in corpus.documents.values()
        ],
    }
    Path(path).write_text(
        json.dumps(payload, ensure_ascii=False, sort_keys=True, separators=(",", ":")),
        encoding="utf-8",
    )


def load_index(path: str | Path) -> Corpus:
    try:
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise DataError(f"corrupt index file {path}: {exc}") from exc
    if payload.get("version") != INDEX_VERSION:
        raise DataError(
            f"index version mismatch: expected {INDEX_VERSION}, got {payload.get('version')}"
        )
    return build_index([Document(**d) for d in payload["documents"]])


def load_documents(path: str | Path) -> list[Document]:
    """Load a corpus from a directory of text files or a JSON-lines file.

    Directory: each UTF-8 file becomes one document; the file stem is the
    doc_id, the first line the title, the remainder the body.  JSON-lines:
    one {"doc_id","title","body"} object per line.
    """
    path = Path(path)
    docs: list[Document] = []
    if path.is_dir():
        for p in sorted(path.iterdir()):
            if not p.is_file():
                continue
            text = p.read_text(encoding="utf-8")
            first, _, rest = text.partition("\n")
            docs.append(Document(p.stem, first.strip(), rest.strip()))
    else:
        with path.open(encoding="utf-8") as fh:
            for i, line in enumerate(fh, start=1):
                if not line.strip():
                    continue
                try:
                    rec = json.loads(line)
                    docs.append(Document(rec["doc_id"], rec["title"], rec["body"]))
                except (json.JSONDecodeError, KeyError) as exc:
                    raise DataError(f"{path}:{i}: bad document record: {exc}") from exc
    return docs
