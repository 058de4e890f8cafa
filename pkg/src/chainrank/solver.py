"""Pairwise ranking optimization with hard lower bounds on rank-feature weights.

Minimizes, over weight vectors w,

    0.5 * ||w||^2 + C * sum_i max(0, 1 - w . delta_i)

subject to w[j] >= w_min for every bounded dimension j (the rank-feature
block).  Each delta_i is the feature-vector difference of a preferred and a
non-preferred document for the same query, so `w . delta_i >= 1` means the
preference is satisfied with margin.

The minimizer runs deterministic dual coordinate ascent with a fixed sweep
order: each preference constraint owns a dual variable in [0, C] and each
bounded dimension a nonnegative multiplier.  Coordinate steps are exact, so
small instances solve to machine precision; duplicate constraints are
aggregated into one dual variable with upper bound (count * C), which leaves
the objective unchanged.  A plain binary hinge-loss mode (for the query-chain
classifier) reuses the same machinery on label-signed, bias-augmented rows.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DataError
from .features import RANK_THRESHOLDS, FeatureSpace, SparseVector

DEFAULT_C = 1.0
DEFAULT_W_MIN = 1.0
DEFAULT_TOLERANCE = 1e-6
DEFAULT_MAX_ITERS = 10000


@dataclass(frozen=True)
class PreferenceConstraint:
    """One pairwise preference, stored as delta = phi(preferred) - phi(other)."""

    delta: SparseVector


@dataclass
class SlackReport:
    """Induced slack per constraint: xi_i = max(0, 1 - w . delta_i)."""

    xi: np.ndarray
    total: float
    violations: int  # constraints with xi >= 1, i.e. actually misordered


@dataclass
class RankingSolution:
    weights: np.ndarray
    iterations: int
    objective: float
    violations: int
    converged: bool


@dataclass
class BinaryModel:
    """Linear classifier: predict positive iff weights . x + bias > 0."""

    weights: np.ndarray
    bias: float
    degenerate: bool = False
    meta: dict = field(default_factory=dict)

    def decision(self, x: np.ndarray) -> float:
        x = np.asarray(x, dtype=float)
        if x.shape != self.weights.shape:
            raise DataError(
                f"dimension mismatch: model dim {self.weights.shape[0]}, input {x.shape}"
            )
        return float(self.weights @ x + self.bias)

    def predict(self, x: np.ndarray) -> bool:
        return self.decision(x) > 0.0


def objective(w: np.ndarray, constraints: list[PreferenceConstraint], C: float) -> float:
    """Exact value of 0.5*||w||^2 + C * sum max(0, 1 - w . delta)."""
    w = np.asarray(w, dtype=float)
    hinge = 0.0
    for c in constraints:
        hinge += max(0.0, 1.0 - c.delta.dot(w))
    return 0.5 * float(w @ w) + C * hinge


def subgradient(w: np.ndarray, constraints: list[PreferenceConstraint], C: float) -> np.ndarray:
    """Analytic subgradient of `objective`; at hinge kinks takes the inactive side."""
    w = np.asarray(w, dtype=float)
    g = w.copy()
    for c in constraints:
        if c.delta.dot(w) < 1.0:
            for i, v in zip(c.delta.ids, c.delta.values):
                g[i] -= C * v
    return g


def slack_report(model_or_w, constraints: list[PreferenceConstraint]) -> SlackReport:
    """Per-constraint slack for a Model or a raw weight vector."""
    w = model_or_w.weights if isinstance(model_or_w, Model) else np.asarray(model_or_w, float)
    xi = np.array([max(0.0, 1.0 - c.delta.dot(w)) for c in constraints])
    return SlackReport(xi=xi, total=float(xi.sum()), violations=int((xi >= 1.0).sum()))


def _aggregate(constraints: list[PreferenceConstraint], dim: int):
    """Collapse duplicate deltas into CSR-style arrays with multiplicities."""
    groups: dict[tuple, int] = {}
    order: list[tuple] = []
    for c in constraints:
        if not c.delta.ids:
            warnings.warn("dropping constraint with zero delta (identical feature vectors)")
            continue
        if c.delta.ids[-1] >= dim:
            raise DataError(
                f"constraint feature id {c.delta.ids[-1]} outside dimension {dim}"
            )
        key = (c.delta.ids, c.delta.values)
        if key not in groups:
            groups[key] = 0
            order.append(key)
        groups[key] += 1

    indptr = [0]
    indices: list[int] = []
    data: list[float] = []
    counts: list[int] = []
    for key in order:
        ids, values = key
        indices.extend(ids)
        data.extend(values)
        indptr.append(len(indices))
        counts.append(groups[key])
    return (
        np.array(indptr, dtype=np.int64),
        np.array(indices, dtype=np.int64),
        np.array(data, dtype=float),
        np.array(counts, dtype=float),
    )


def train_ranking(
    constraints: list[PreferenceConstraint],
    C: float = DEFAULT_C,
    w_min: float = DEFAULT_W_MIN,
    bounded_dims: tuple[int, ...] = (),
    dim: int | None = None,
    tolerance: float = DEFAULT_TOLERANCE,
    max_iters: int = DEFAULT_MAX_ITERS,
) -> RankingSolution:
    """Solve the bounded ranking problem; bound feasibility is exact on return.

    `dim` defaults to the smallest dimension covering all constraint ids and
    bounded dims.  `tolerance` bounds the worst per-coordinate optimality
    violation; `max_iters` caps full sweeps.  Hitting the cap returns a
    result flagged `converged=False` with a warning, never silently.
    """
    if C <= 0:
        raise DataError(f"C must be positive, got {C}")
    bounded = np.array(sorted(set(bounded_dims)), dtype=np.int64)
    if dim is None:
        dim = 0
        if len(bounded):
            dim = int(bounded[-1]) + 1
        for c in constraints:
            if c.delta.ids:
                dim = max(dim, c.delta.ids[-1] + 1)
    if len(bounded) and bounded[-1] >= dim:
        raise DataError("bounded dim outside dimension")

    indptr, indices, data, counts = _aggregate(constraints, dim)
    n = len(counts)
    ub = counts * C
    sq = np.array(
        [float(data[indptr[i]: indptr[i + 1]] @ data[indptr[i]: indptr[i + 1]]) for i in range(n)]
    )

    w = np.zeros(dim)
    beta = np.full(len(bounded), w_min, dtype=float)
    if len(bounded):
        w[bounded] = w_min  # start at the projection of 0 onto the feasible set
    alpha = np.zeros(n)

    sweeps = 0
    converged = n == 0 and not len(bounded)
    for sweeps in range(1, max_iters + 1):
        max_pg = 0.0
        for i in range(n):
            s, e = indptr[i], indptr[i + 1]
            idx = indices[s:e]
            row = data[s:e]
            g = float(row @ w[idx]) - 1.0
            a = alpha[i]
            if a <= 0.0:
                pg = min(g, 0.0)
            elif a >= ub[i]:
                pg = max(g, 0.0)
            else:
                pg = g
            if pg != 0.0:
                max_pg = max(max_pg, abs(pg))
                new_a = min(max(a - g / sq[i], 0.0), ub[i])
                if new_a != a:
                    w[idx] += (new_a - a) * row
                    alpha[i] = new_a
        for j, d in enumerate(bounded):
            g = w[d] - w_min
            pg = min(g, 0.0) if beta[j] <= 0.0 else g
            max_pg = max(max_pg, abs(pg))
            new_b = max(0.0, beta[j] - g)
            if new_b != beta[j]:
                w[d] += new_b - beta[j]
                beta[j] = new_b
        if max_pg < tolerance:
            converged = True
            break

    if len(bounded):
        w[bounded] = np.maximum(w[bounded], w_min)  # exact feasibility, no-op at optimum
    if not converged:
        warnings.warn(
            f"ranking solver hit max_iters={max_iters} before reaching tolerance {tolerance}"
        )
    rep = slack_report(w, constraints)
    return RankingSolution(
        weights=w,
        iterations=sweeps,
        objective=objective(w, constraints, C),
        violations=rep.violations,
        converged=converged,
    )


def binary_objective(w: np.ndarray, bias: float, X: np.ndarray, y: np.ndarray, C: float) -> float:
    """Hinge objective of the binary mode. The bias is regularized like a weight."""
    wt = np.concatenate([np.asarray(w, float), [bias]])
    margins = y * (X @ w + bias)
    return 0.5 * float(wt @ wt) + C * float(np.maximum(0.0, 1.0 - margins).sum())


def train_binary(
    X: np.ndarray,
    y: np.ndarray,
    C: float = DEFAULT_C,
    tolerance: float = DEFAULT_TOLERANCE,
    max_iters: int = DEFAULT_MAX_ITERS,
) -> BinaryModel:
    """Train a linear hinge-loss classifier with a (regularized) bias term.

    Labels must be +1/-1.  Single-class input yields a flagged degenerate
    model that always predicts that class.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if X.ndim != 2 or len(X) != len(y):
        raise DataError("X must be 2-d with one row per label")
    if not set(np.unique(y)) <= {-1.0, 1.0}:
        raise DataError("labels must be +1/-1")
    classes = set(np.unique(y))
    if len(classes) < 2:
        label = 1.0 if classes == {1.0} or not classes else -1.0
        warnings.warn("single-class training input: returning degenerate bias-only model")
        return BinaryModel(
            weights=np.zeros(X.shape[1]), bias=label, degenerate=True,
            meta={"converged": True, "iterations": 0},
        )

    # Row i of the ranking form: delta_i = y_i * [x_i, 1].
    constraints = []
    for xi, yi in zip(X, y):
        row = np.concatenate([xi, [1.0]]) * yi
        items = {j: float(v) for j, v in enumerate(row) if v != 0.0}
        constraints.append(PreferenceConstraint(SparseVector.from_items(items)))
    sol = train_ranking(
        constraints, C=C, dim=X.shape[1] + 1, tolerance=tolerance, max_iters=max_iters
    )
    return BinaryModel(
        weights=sol.weights[:-1],
        bias=float(sol.weights[-1]),
        degenerate=False,
        meta={"converged": sol.converged, "iterations": sol.iterations,
              "objective": sol.objective},
    )


MODEL_VERSION = 1


@dataclass
class Model:
    """Learned retrieval model: dense rank-feature block + sparse term/doc map."""

    space: FeatureSpace
    weights: np.ndarray
    C: float
    w_min: float
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if len(self.weights) != self.space.dim:
            raise DataError(
                f"weight dim {len(self.weights)} != feature space dim {self.space.dim}"
            )
        low = self.weights[: self.space.n_rank_dims]
        if len(low) and low.min() < self.w_min:
            raise DataError("rank-feature weight below w_min")

    def rank_weights(self, fn: str) -> np.ndarray:
        off = self.space.rank_offset(fn)
        return self.weights[off: off + 28]

    def term_doc_weight(self, term: str, doc_id: str) -> float:
        fid = self.space._term_doc.get((term, doc_id))
        return float(self.weights[fid]) if fid is not None else 0.0

    def term_doc_items(self) -> list[tuple[str, str, float]]:
        off = self.space.n_rank_dims
        return [
            (t, d, float(self.weights[off + i]))
            for i, (t, d) in enumerate(self.space.term_doc_pairs())
        ]


def fit_model(
    space: FeatureSpace,
    constraints: list[PreferenceConstraint],
    C: float = DEFAULT_C,
    w_min: float = DEFAULT_W_MIN,
    tolerance: float = DEFAULT_TOLERANCE,
    max_iters: int = DEFAULT_MAX_ITERS,
) -> Model:
    """Train over a feature space, bounding every rank-feature dimension."""
    space.freeze()
    sol = train_ranking(
        constraints,
        C=C,
        w_min=w_min,
        bounded_dims=tuple(range(space.n_rank_dims)),
        dim=space.dim,
        tolerance=tolerance,
        max_iters=max_iters,
    )
    meta = {
        "iterations": sol.iterations,
        "objective": sol.objective,
        "violations": sol.violations,
        "converged": sol.converged,
        "n_constraints": len(constraints),
    }
    return Model(space=space, weights=sol.weights, C=C, w_min=w_min, meta=meta)


def fresh_model(space: FeatureSpace, w_min: float = DEFAULT_W_MIN, C: float = DEFAULT_C) -> Model:
    """Untrained model: every rank weight at w_min, term/doc weights zero."""
    w = np.zeros(space.dim)
    w[: space.n_rank_dims] = w_min
    return Model(space=space, weights=w, C=C, w_min=w_min, meta={"fresh": True})


def model_to_json(model: Model) -> str:
    """Canonical JSON text; re-serializing a loaded model is byte-identical."""
    payload = {
        "version": MODEL_VERSION,
        "C": model.C,
        "w_min": model.w_min,
        "thresholds": list(RANK_THRESHOLDS),
        "base_functions": list(model.space.base_functions),
        "rank_weights": {
            fn: [float(v) for v in model.rank_weights(fn)]
            for fn in model.space.base_functions
        },
        "term_doc_weights": [
            {"term": t, "doc": d, "w": w} for t, d, w in model.term_doc_items()
        ],
        "meta": model.meta,
    }
    return json.dumps(payload, ensure_ascii=False, sort_keys=True, separators=(",", ":"))


def model_from_json(text: str) -> Model:
    payload = json.loads(text)
    if payload.get("version") != MODEL_VERSION:
        raise DataError(
            f"model version mismatch: expected {MODEL_VERSION}, got {payload.get('version')}"
        )
    space = FeatureSpace(tuple(payload["base_functions"]))
    weights = []
    for fn in space.base_functions:
        weights.extend(payload["rank_weights"][fn])
    for rec in payload["term_doc_weights"]:
        space.term_doc_id(rec["term"], rec["doc"])
        weights.append(rec["w"])
    space.freeze()
    return Model(
        space=space,
        weights=np.array(weights, dtype=float),
        C=float(payload["C"]),
        w_min=float(payload["w_min"]),
        meta=payload["meta"],
    )


def save_model(model: Model, path: str | Path) -> None:
    Path(path).write_text(model_to_json(model), encoding="utf-8")


def load_model(path: str | Path) -> Model:
    return model_from_json(Path(path).read_text(encoding="utf-8"))
