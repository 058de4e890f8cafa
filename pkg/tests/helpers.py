"""Shared builders and independent oracles used across test modules."""

from __future__ import annotations

import numpy as np

from chainrank.corpus import Document
from chainrank.logs import ClickEvent, QueryEvent
from chainrank.simulate import Intent


def make_query(qid, session, t, terms, docs, abstracts=None):
    if abstracts is None:
        abstracts = [f"abstract for {d}" for d in docs]
    return QueryEvent(qid, session, t, list(terms), list(zip(docs, abstracts)))


def make_click(query: QueryEvent, rank: int, t: int | None = None) -> ClickEvent:
    doc = query.result_docs()[rank - 1]
    return ClickEvent(query.query_id, doc, rank, query.timestamp if t is None else t)


def hinge_objective_dense(W: np.ndarray, deltas: np.ndarray, C: float) -> np.ndarray:
    """Vectorized objective over rows of W; the grid oracle's evaluator."""
    margins = W @ deltas.T
    hinge = np.maximum(0.0, 1.0 - margins).sum(axis=1)
    return 0.5 * (W * W).sum(axis=1) + C * hinge


def grid_minimize_hinge(
    deltas: np.ndarray,
    C: float,
    w_min: float | None = None,
    bounded: tuple[int, ...] = (),
    rounds: int = 30,
    shrink: float = 0.6,
) -> tuple[np.ndarray, float]:
    """Projected zooming grid search over the hinge objective.

    Independent of the package solver: evaluates the objective on a dense
    grid, re-centers on the incumbent, and shrinks the box.  Bounded dims are
    projected onto [w_min, inf) before evaluation.
    """
    n, d = deltas.shape if deltas.size else (0, len(bounded))
    pts = 21 if d <= 2 else (13 if d == 3 else 9)
    radius = np.sqrt(2.0 * C * max(n, 1)) + 1.0 + (abs(w_min) if w_min is not None else 0.0)

    center = np.zeros(d)
    if bounded:
        center[list(bounded)] = w_min
    best_w = center.copy()
    best_f = hinge_objective_dense(best_w[None, :], deltas, C)[0] if n else 0.5 * best_w @ best_w

    half = radius
    for _ in range(rounds):
        axes = [np.linspace(center[j] - half, center[j] + half, pts) for j in range(d)]
        mesh = np.meshgrid(*axes, indexing="ij")
        W = np.stack([m.ravel() for m in mesh], axis=1)
        if bounded:
            W[:, list(bounded)] = np.maximum(W[:, list(bounded)], w_min)
        if n:
            fv = hinge_objective_dense(W, deltas, C)
        else:
            fv = 0.5 * (W * W).sum(axis=1)
        i = int(np.argmin(fv))
        if fv[i] < best_f:
            best_f = float(fv[i])
            best_w = W[i].copy()
        center = W[i]
        half *= shrink
    return best_w, float(best_f)


def densify(constraints, dim: int) -> np.ndarray:
    """Constraint deltas as a dense (n, dim) matrix."""
    out = np.zeros((len(constraints), dim))
    for i, c in enumerate(constraints):
        for fid, v in zip(c.delta.ids, c.delta.values):
            out[i, fid] = v
    return out


def make_mixed_world(n_intents: int = 12, seed: int = 0):
    """Tiny corpus whose result lists interleave relevant and irrelevant docs.

    Two query words each hit ten structurally identical documents (ties break
    by doc id, so rankings are fixed).  Each intent marks a random half of
    either list relevant, so across intents every rank position is relevant
    half the time: under pure click noise no preference strategy can beat
    chance, which the noise-sensitivity tests rely on.
    """
    rng = np.random.default_rng(seed)
    docs = []
    for i in range(10):
        docs.append(Document(f"a-{i:02d}", f"alpha entry {i}", "alpha filler one two"))
        docs.append(Document(f"b-{i:02d}", f"beta entry {i}", "beta filler one two"))
    intents = []
    for k in range(n_intents):
        rel = {}
        for side in ("a", "b"):
            for i in rng.choice(10, size=5, replace=False):
                rel[f"{side}-{i:02d}"] = 1.0
        script = (("alpha",), ("beta",)) if k % 2 == 0 else (("beta",), ("alpha",))
        intents.append(Intent(f"need-{k:02d}", rel, script))
    return docs, intents
