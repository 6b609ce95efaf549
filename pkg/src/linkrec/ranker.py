"""Personalized PageRank over a recommender graph and top-N extraction.

The walk solves PR = alpha * M * PR + (1 - alpha) * d by power
iteration, where M is the column-stochastic transition matrix, d the
restart vector and alpha the probability of following an edge rather
than restarting (the damping factor multiplies M, so grid values plug
in unchanged). Dangling nodes hand their mass back to d, which keeps
the scores summing to 1 and preserves the personalized-restart
semantics.

Restart vectors depend on the graph flavor:

* BIP -- all mass on the user's node.
* STG -- beta on the user node, 1 - beta on the most recent session.
* LSG -- all mass on the user's latest temporal node at or before the
  recommendation time.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING, Iterable, Mapping

import numpy as np
from scipy import sparse

from .graphs import ITEM, SESSION, TITEM, TUSER, USER, RecGraph

if TYPE_CHECKING:
    from .tuning import ParamSetting

__all__ = [
    "TransitionMatrix",
    "ScoreVector",
    "transition_matrix",
    "personalization",
    "personalization_matrix",
    "pagerank",
    "pagerank_batch",
    "item_scores",
    "item_matrix",
    "top_n",
    "recommend",
]

DEFAULT_TOL = 1e-10
DEFAULT_MAX_ITER = 100


@dataclass
class TransitionMatrix:
    """Column-stochastic matrix over a deterministic node ordering.

    ``matrix[y, x]`` is w(x, y) / out_weight(x); columns of dangling
    nodes (zero out-weight) are empty and flagged in ``dangling``.
    """

    nodes: list
    index: dict
    matrix: sparse.csr_matrix
    dangling: np.ndarray  # bool mask over node indices

    @property
    def n(self) -> int:
        return len(self.nodes)


@dataclass
class ScoreVector:
    """PageRank scores per node, plus convergence status.

    ``converged`` is False when the iteration hit max_iter before the
    L1 change dropped below tol; the scores are still usable.
    """

    scores: dict
    converged: bool
    iterations: int


def transition_matrix(graph: RecGraph) -> TransitionMatrix:
    """Out-weight-normalize the graph's edges into column convention."""
    if not graph.nodes:
        raise ValueError("cannot build transition matrix of empty graph")
    nodes = sorted(graph.nodes)
    index = {node: i for i, node in enumerate(nodes)}
    n = len(nodes)
    out_weight = np.zeros(n)
    for (src, _), w in graph.edges.items():
        out_weight[index[src]] += w
    rows = np.empty(len(graph.edges), dtype=np.int64)
    cols = np.empty(len(graph.edges), dtype=np.int64)
    data = np.empty(len(graph.edges))
    for k, ((src, dst), w) in enumerate(graph.edges.items()):
        s = index[src]
        rows[k], cols[k] = index[dst], s
        data[k] = w / out_weight[s]
    matrix = sparse.csr_matrix((data, (rows, cols)), shape=(n, n))
    return TransitionMatrix(
        nodes=nodes, index=index, matrix=matrix, dangling=out_weight == 0.0
    )


def personalization(
    graph: RecGraph,
    user: str,
    t: float | None = None,
    beta: float | None = None,
) -> dict:
    """Restart vector d for recommending to ``user`` (at time t for LSG).

    Returns a sparse node -> mass map; zero masses are omitted.
    """
    if graph.flavor == "bip":
        node = (USER, user)
        if node not in graph.nodes:
            raise ValueError(f"user {user!r} not in training graph")
        return {node: 1.0}

    if graph.flavor == "stg":
        node = (USER, user)
        if node not in graph.nodes:
            raise ValueError(f"user {user!r} not in training graph")
        if beta is None or not 0.0 <= beta <= 1.0:
            raise ValueError("stg personalization requires beta in [0, 1]")
        last_k = max(
            (n[2] for n in graph.nodes if n[0] == SESSION and n[1] == user),
            default=None,
        )
        if last_k is None:  # unreachable: active users always have a session
            raise ValueError(f"user {user!r} has no session node")
        d = {}
        if beta > 0.0:
            d[node] = beta
        if beta < 1.0:
            d[(SESSION, user, last_k)] = 1.0 - beta
        return d

    if graph.flavor == "lsg":
        if t is None:
            raise ValueError("lsg personalization requires the query time t")
        times = [n[1] for n in graph.nodes if n[0] == TUSER and n[2] == user]
        if not times:
            raise ValueError(f"user {user!r} not in training graph")
        past = [tk for tk in times if tk <= t]
        if not past:
            raise ValueError(
                f"user {user!r} not in training graph at or before t={t}"
            )
        return {(TUSER, max(past), user): 1.0}

    raise ValueError(f"unknown graph flavor {graph.flavor!r}")


def personalization_matrix(tm: TransitionMatrix, vectors: Iterable[Mapping]) -> np.ndarray:
    """Stack restart vectors as dense columns in the matrix's node order."""
    cols = list(vectors)
    D = np.zeros((tm.n, len(cols)))
    for j, d in enumerate(cols):
        for node, mass in d.items():
            D[tm.index[node], j] = mass
    return D


def _check_restart(tm: TransitionMatrix, d: Mapping) -> None:
    if not d:
        raise ValueError("personalization vector has empty support")
    missing = [node for node in d if node not in tm.index]
    if missing:
        raise ValueError(f"personalization references unknown nodes: {missing!r}")
    total = sum(d.values())
    if abs(total - 1.0) > 1e-12:
        raise ValueError(f"personalization mass sums to {total}, expected 1")


def pagerank_batch(
    tm: TransitionMatrix,
    D: np.ndarray,
    alpha: float,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
) -> tuple[np.ndarray, bool, int]:
    """Power iteration for many restart vectors at once.

    ``D`` holds one restart vector per column; the recurrence
    X <- alpha * (M X + D * dangling_mass) + (1 - alpha) * D is applied
    to all columns in one sparse product per step, starting from X = D.
    Returns (scores, converged, iterations).
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie in (0, 1)")
    if tol <= 0:
        raise ValueError("tol must be positive")
    if max_iter < 1:
        raise ValueError("max_iter must be at least 1")
    M = tm.matrix
    has_dangling = bool(tm.dangling.any())
    restart = (1.0 - alpha) * D
    X = D.copy()
    for iteration in range(1, max_iter + 1):
        X_next = M @ X
        if has_dangling:
            X_next += D * X[tm.dangling].sum(axis=0)
        X_next *= alpha
        X_next += restart
        # L1 change per column; X doubles as scratch before being replaced
        np.subtract(X_next, X, out=X)
        np.abs(X, out=X)
        err = X.sum(axis=0).max()
        X = X_next
        if err < tol:
            return X, True, iteration
    return X, False, max_iter


def pagerank(
    tm: TransitionMatrix,
    d: Mapping,
    alpha: float,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
) -> ScoreVector:
    """Solve PR = alpha * M * PR + (1 - alpha) * d for one restart vector."""
    _check_restart(tm, d)
    D = personalization_matrix(tm, [d])
    X, converged, iterations = pagerank_batch(tm, D, alpha, tol=tol, max_iter=max_iter)
    scores = dict(zip(tm.nodes, X[:, 0].tolist()))
    return ScoreVector(scores=scores, converged=converged, iterations=iterations)


def item_scores(graph: RecGraph, pr: ScoreVector) -> dict[str, float]:
    """Collapse node scores to item scores.

    BIP/STG read the item node directly; LSG sums the user's preference
    over every temporal occurrence of the item.
    """
    out: dict[str, float] = {}
    for node, score in pr.scores.items():
        if node[0] == ITEM:
            out[node[1]] = out.get(node[1], 0.0) + score
        elif node[0] == TITEM:
            out[node[2]] = out.get(node[2], 0.0) + score
    return out


def item_matrix(graph: RecGraph, tm: TransitionMatrix) -> tuple[list[str], sparse.csr_matrix]:
    """Sparse aggregation matrix A with A @ scores = per-item scores.

    Items are sorted, so row order doubles as the ranking tie-break.
    """
    items = sorted(graph.item_ids())
    item_row = {item: r for r, item in enumerate(items)}
    rows, cols = [], []
    for node, idx in tm.index.items():
        if node[0] == ITEM:
            rows.append(item_row[node[1]])
            cols.append(idx)
        elif node[0] == TITEM:
            rows.append(item_row[node[2]])
            cols.append(idx)
    A = sparse.csr_matrix(
        (np.ones(len(rows)), (rows, cols)), shape=(len(items), tm.n)
    )
    return items, A


def top_n(
    scores: Mapping[str, float],
    exclude: set[str],
    n: int,
) -> list[tuple[str, float]]:
    """Best n items by descending score, ties by ascending item id."""
    if n < 1:
        raise ValueError("n must be at least 1")
    candidates = [(item, s) for item, s in scores.items() if item not in exclude]
    candidates.sort(key=lambda kv: (-kv[1], kv[0]))
    return candidates[:n]


def recommend(
    graph: RecGraph,
    user: str,
    t: float,
    params: "ParamSetting",
    seen: set[str],
    tm: TransitionMatrix | None = None,
) -> list[tuple[str, float]]:
    """personalization -> pagerank -> item_scores -> top_n, excluding seen."""
    if tm is None:
        tm = transition_matrix(graph)
    d = personalization(graph, user, t=t, beta=params.beta)
    pr = pagerank(tm, d, alpha=params.alpha)
    scores = item_scores(graph, pr)
    return top_n(scores, exclude=seen, n=params.n)
