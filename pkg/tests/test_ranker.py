import random

import numpy as np
import pytest

from linkrec.graphs import (
    ITEM,
    SESSION,
    TITEM,
    TUSER,
    USER,
    RecGraph,
    build_bip,
    build_lsg,
    build_stg,
)
from linkrec.ranker import (
    ScoreVector,
    item_matrix,
    item_scores,
    pagerank,
    pagerank_batch,
    personalization,
    personalization_matrix,
    recommend,
    top_n,
    transition_matrix,
)
from linkrec.tuning import ParamSetting

from conftest import make_stream


def two_node_cycle():
    return RecGraph(
        flavor="bip",
        nodes=frozenset({(USER, "a"), (ITEM, "b")}),
        edges={
            ((USER, "a"), (ITEM, "b")): 1.0,
            ((ITEM, "b"), (USER, "a")): 1.0,
        },
    )


def random_digraph(rng: random.Random, max_nodes: int = 50) -> RecGraph:
    """Arbitrary weighted digraph (dangling nodes likely), as a RecGraph."""
    n = rng.randint(2, max_nodes)
    density = rng.uniform(0.1, 0.5)
    nodes = [(USER, f"n{k}") for k in range(n)]
    edges = {}
    for src in nodes:
        for dst in nodes:
            if src != dst and rng.random() < density:
                edges[(src, dst)] = rng.uniform(0.1, 1.0)
    return RecGraph(flavor="bip", nodes=frozenset(nodes), edges=edges)


def random_restart(rng: random.Random, tm) -> dict:
    support = rng.sample(tm.nodes, rng.randint(1, len(tm.nodes)))
    masses = [rng.random() + 1e-3 for _ in support]
    total = sum(masses)
    return {node: m / total for node, m in zip(support, masses)}


def dense_pagerank(tm, d: dict, alpha: float) -> np.ndarray:
    """Oracle: direct linear solve of the restart equation with the
    dangling columns replaced by the restart vector."""
    n = tm.n
    d_vec = np.zeros(n)
    for node, mass in d.items():
        d_vec[tm.index[node]] = mass
    A = tm.matrix.toarray()
    A[:, tm.dangling] = d_vec[:, None]
    return np.linalg.solve(np.eye(n) - alpha * A, (1.0 - alpha) * d_vec)


# --- transition matrix ---------------------------------------------------------


def test_transition_matrix_two_cycle():
    tm = transition_matrix(two_node_cycle())
    assert tm.matrix.toarray().tolist() == [[0.0, 1.0], [1.0, 0.0]]
    assert not tm.dangling.any()


def test_transition_matrix_proportional_normalization():
    graph = RecGraph(
        flavor="bip",
        nodes=frozenset({(USER, "x"), (ITEM, "a"), (ITEM, "b")}),
        edges={
            ((USER, "x"), (ITEM, "a")): 2.0,
            ((USER, "x"), (ITEM, "b")): 2.0,
        },
    )
    tm = transition_matrix(graph)
    col = tm.matrix.toarray()[:, tm.index[(USER, "x")]]
    assert col[tm.index[(ITEM, "a")]] == 0.5
    assert col[tm.index[(ITEM, "b")]] == 0.5
    # the two items have no out-edges here
    assert tm.dangling[tm.index[(ITEM, "a")]]
    assert tm.dangling[tm.index[(ITEM, "b")]]


def test_transition_matrix_stg_item_column():
    # item with edges item->session (0.5) and item->user (1): 1/3 and 2/3
    graph = RecGraph(
        flavor="stg",
        nodes=frozenset({(USER, "u"), (ITEM, "i"), (SESSION, "u", 1)}),
        edges={
            ((ITEM, "i"), (SESSION, "u", 1)): 0.5,
            ((ITEM, "i"), (USER, "u")): 1.0,
            ((USER, "u"), (ITEM, "i")): 1.0,
            ((SESSION, "u", 1), (ITEM, "i")): 1.0,
        },
    )
    tm = transition_matrix(graph)
    col = tm.matrix.toarray()[:, tm.index[(ITEM, "i")]]
    assert col[tm.index[(SESSION, "u", 1)]] == pytest.approx(0.5 / 1.5)
    assert col[tm.index[(USER, "u")]] == pytest.approx(1.0 / 1.5)


@pytest.mark.parametrize("seed", range(6))
def test_transition_matrix_columns_stochastic(seed):
    graph = random_digraph(random.Random(seed), max_nodes=25)
    tm = transition_matrix(graph)
    sums = np.asarray(tm.matrix.sum(axis=0)).ravel()
    for j in range(tm.n):
        if tm.dangling[j]:
            assert sums[j] == 0.0
        else:
            assert abs(sums[j] - 1.0) <= 1e-12


# --- pagerank -------------------------------------------------------------------


def test_pagerank_single_node_fixed_point():
    graph = RecGraph(flavor="bip", nodes=frozenset({(USER, "a")}), edges={})
    tm = transition_matrix(graph)
    pr = pagerank(tm, {(USER, "a"): 1.0}, alpha=0.7)
    assert pr.scores[(USER, "a")] == pytest.approx(1.0)
    assert pr.converged


def test_pagerank_two_cycle_closed_form():
    tm = transition_matrix(two_node_cycle())
    d = {(USER, "a"): 1.0}
    expected = dense_pagerank(tm, d, alpha=0.5)
    # closed form: PR_a = 2/3, PR_b = 1/3
    assert expected[tm.index[(USER, "a")]] == pytest.approx(2 / 3)
    assert expected[tm.index[(ITEM, "b")]] == pytest.approx(1 / 3)
    pr = pagerank(tm, d, alpha=0.5, tol=1e-13, max_iter=500)
    assert pr.scores[(USER, "a")] == pytest.approx(2 / 3, abs=1e-10)
    assert pr.scores[(ITEM, "b")] == pytest.approx(1 / 3, abs=1e-10)


def test_pagerank_uniform_restart_on_symmetric_graph():
    # 3-cycle of identical nodes with uniform restart stays uniform
    nodes = [(USER, c) for c in "abc"]
    edges = {}
    for i in range(3):
        edges[(nodes[i], nodes[(i + 1) % 3])] = 1.0
        edges[(nodes[i], nodes[(i + 2) % 3])] = 1.0
    graph = RecGraph(flavor="bip", nodes=frozenset(nodes), edges=edges)
    tm = transition_matrix(graph)
    pr = pagerank(tm, {node: 1 / 3 for node in nodes}, alpha=0.5)
    for node in nodes:
        assert pr.scores[node] == pytest.approx(1 / 3, abs=1e-12)


@pytest.mark.parametrize("seed", range(10))
def test_pagerank_matches_dense_solve(seed):
    rng = random.Random(seed)
    graph = random_digraph(rng, max_nodes=30)
    tm = transition_matrix(graph)
    d = random_restart(rng, tm)
    alpha = rng.choice([0.05, 0.3, 0.5, 0.9])
    pr = pagerank(tm, d, alpha=alpha, tol=1e-13, max_iter=1000)
    expected = dense_pagerank(tm, d, alpha)
    got = np.array([pr.scores[node] for node in tm.nodes])
    assert np.max(np.abs(got - expected)) <= 1e-8
    assert abs(sum(pr.scores.values()) - 1.0) <= 1e-9


@pytest.mark.parametrize("seed", range(5))
def test_pagerank_mass_conserved_each_iteration(seed):
    rng = random.Random(100 + seed)
    graph = random_digraph(rng, max_nodes=20)
    tm = transition_matrix(graph)
    d = random_restart(rng, tm)
    D = personalization_matrix(tm, [d])
    X = D.copy()
    for _ in range(30):
        dangling_mass = X[tm.dangling].sum(axis=0)
        X = 0.85 * (tm.matrix @ X + D * dangling_mass) + 0.15 * D
        assert abs(X.sum() - 1.0) <= 1e-9


def test_pagerank_restart_dominance_at_small_alpha():
    rng = random.Random(7)
    for _ in range(5):
        graph = random_digraph(rng, max_nodes=25)
        tm = transition_matrix(graph)
        d = random_restart(rng, tm)
        pr = pagerank(tm, d, alpha=0.01)
        dist = sum(
            abs(pr.scores[node] - d.get(node, 0.0)) for node in tm.nodes
        )
        assert dist < 0.05


def test_pagerank_nonconvergence_flagged():
    tm = transition_matrix(two_node_cycle())
    pr = pagerank(tm, {(USER, "a"): 1.0}, alpha=0.9, tol=1e-15, max_iter=3)
    assert not pr.converged
    assert pr.iterations == 3
    assert abs(sum(pr.scores.values()) - 1.0) <= 1e-9


def test_pagerank_rejects_bad_restart():
    tm = transition_matrix(two_node_cycle())
    with pytest.raises(ValueError, match="empty support"):
        pagerank(tm, {}, alpha=0.5)
    with pytest.raises(ValueError, match="unknown nodes"):
        pagerank(tm, {(USER, "zzz"): 1.0}, alpha=0.5)
    with pytest.raises(ValueError, match="sums to"):
        pagerank(tm, {(USER, "a"): 0.5}, alpha=0.5)


def test_pagerank_batch_matches_single():
    rng = random.Random(42)
    graph = random_digraph(rng, max_nodes=20)
    tm = transition_matrix(graph)
    ds = [random_restart(rng, tm) for _ in range(4)]
    D = personalization_matrix(tm, ds)
    X, _, _ = pagerank_batch(tm, D, alpha=0.3, tol=1e-13, max_iter=1000)
    for j, d in enumerate(ds):
        single = pagerank(tm, d, alpha=0.3, tol=1e-13, max_iter=1000)
        got = np.array([single.scores[node] for node in tm.nodes])
        assert np.max(np.abs(X[:, j] - got)) <= 1e-10


# --- personalization -------------------------------------------------------------


def test_personalization_bip(toy_stream):
    graph = build_bip(toy_stream)
    assert personalization(graph, "u1") == {(USER, "u1"): 1.0}


def test_personalization_bip_unknown_user(toy_stream):
    graph = build_bip(toy_stream)
    with pytest.raises(ValueError, match="not in training graph"):
        personalization(graph, "nobody")


def test_personalization_stg_splits_mass(toy_stream):
    graph = build_stg(toy_stream, delta=3, eta_s=0.5)
    d = personalization(graph, "u1", beta=0.7)
    assert d == {(USER, "u1"): 0.7, (SESSION, "u1", 2): pytest.approx(0.3)}


def test_personalization_stg_beta_extremes(toy_stream):
    graph = build_stg(toy_stream, delta=3, eta_s=0.5)
    assert personalization(graph, "u2", beta=1.0) == {(USER, "u2"): 1.0}
    assert personalization(graph, "u2", beta=0.0) == {(SESSION, "u2", 2): 1.0}


def test_personalization_stg_requires_beta(toy_stream):
    graph = build_stg(toy_stream, delta=3, eta_s=0.5)
    with pytest.raises(ValueError, match="beta"):
        personalization(graph, "u1")


def test_personalization_lsg_latest_node_at_or_before_t(toy_stream):
    graph = build_lsg(toy_stream, eta_s=0.5)
    # u1 active at 1, 2, 4, 6; query between 2 and 4 picks 2
    assert personalization(graph, "u1", t=3.5) == {(TUSER, 2, "u1"): 1.0}
    assert personalization(graph, "u1", t=2) == {(TUSER, 2, "u1"): 1.0}
    assert personalization(graph, "u1", t=100) == {(TUSER, 6, "u1"): 1.0}


def test_personalization_lsg_before_first_activity(toy_stream):
    graph = build_lsg(toy_stream, eta_s=0.5)
    with pytest.raises(ValueError, match="not in training graph"):
        personalization(graph, "u1", t=0.5)


def test_personalization_lsg_requires_t(toy_stream):
    graph = build_lsg(toy_stream, eta_s=0.5)
    with pytest.raises(ValueError, match="query time"):
        personalization(graph, "u1")


# --- item scores and top-n --------------------------------------------------------


def test_item_scores_lsg_sums_temporal_nodes():
    scores = {
        (TITEM, 1, "i3"): 0.1,
        (TITEM, 2, "i3"): 0.05,
        (TITEM, 4, "i3"): 0.05,
        (TITEM, 3, "i4"): 0.2,
        (TUSER, 1, "u1"): 0.6,
    }
    pr = ScoreVector(scores=scores, converged=True, iterations=1)
    assert item_scores(None, pr) == {
        "i3": pytest.approx(0.2),
        "i4": pytest.approx(0.2),
    }


def test_item_scores_bip_is_identity_on_items(toy_stream):
    graph = build_bip(toy_stream)
    tm = transition_matrix(graph)
    pr = pagerank(tm, personalization(graph, "u1"), alpha=0.3)
    per_item = item_scores(graph, pr)
    for item in toy_stream.items:
        assert per_item[item] == pr.scores[(ITEM, item)]


def test_item_matrix_aggregates_like_item_scores(toy_stream):
    graph = build_lsg(toy_stream, eta_s=0.5)
    tm = transition_matrix(graph)
    d = personalization(graph, "u2", t=5)
    pr = pagerank(tm, d, alpha=0.5)
    items, A = item_matrix(graph, tm)
    vec = np.array([pr.scores[node] for node in tm.nodes])
    agg = A @ vec
    direct = item_scores(graph, pr)
    for row, item in enumerate(items):
        assert agg[row] == pytest.approx(direct[item], abs=1e-15)


def test_top_n_exclusion_and_order():
    scores = {"a": 0.3, "b": 0.5, "c": 0.2}
    assert top_n(scores, exclude={"b"}, n=2) == [("a", 0.3), ("c", 0.2)]


def test_top_n_tie_breaks_by_item_id():
    assert top_n({"b": 0.4, "a": 0.4}, exclude=set(), n=1) == [("a", 0.4)]


def test_top_n_truncates_to_candidates():
    scores = {"a": 0.1, "b": 0.2}
    assert top_n(scores, exclude=set(), n=10) == [("b", 0.2), ("a", 0.1)]
    assert top_n(scores, exclude={"a", "b"}, n=3) == []


def test_top_n_requires_positive_n():
    with pytest.raises(ValueError):
        top_n({"a": 1.0}, exclude=set(), n=0)


# --- recommend --------------------------------------------------------------------


def test_recommend_bip_toy_only_i4_left(toy_stream):
    graph = build_bip(toy_stream)
    recs = recommend(
        graph, "u1", 6, ParamSetting(alpha=0.5, n=10), seen={"i1", "i2", "i3"}
    )
    assert [item for item, _ in recs] == ["i4"]


def test_recommend_all_seen_gives_empty_list(toy_stream):
    graph = build_bip(toy_stream)
    recs = recommend(
        graph, "u1", 6, ParamSetting(alpha=0.5, n=10), seen=set(toy_stream.items)
    )
    assert recs == []


def test_recommend_lsg_personalizes_on_latest_activity(toy_stream):
    graph = build_lsg(toy_stream, eta_s=0.5)
    d = personalization(graph, "u2", t=5.5)
    assert d == {(TUSER, 5, "u2"): 1.0}
    recs = recommend(
        graph, "u2", 5.5, ParamSetting(alpha=0.5, n=2, eta_s=0.5), seen={"i3", "i4"}
    )
    assert sorted(item for item, _ in recs) == ["i1", "i2"]


def test_recommend_excludes_seen_always(toy_stream):
    graph = build_stg(toy_stream, delta=3, eta_s=0.5)
    params = ParamSetting(alpha=0.3, n=10, delta=3, beta=0.5, eta_s=0.5)
    seen = {"i1", "i3"}
    recs = recommend(graph, "u1", 6, params, seen=seen)
    assert all(item not in seen for item, _ in recs)


# --- scaling invariance ------------------------------------------------------------


@pytest.mark.parametrize("c", [0.5, 3.0])
@pytest.mark.parametrize("seed", range(4))
def test_scaled_weights_leave_ranking_unchanged(seed, c):
    stream = make_stream(seed, n_users=5, n_items=10, n_events=40, t_max=50)
    graph = build_lsg(stream, eta_s=0.5)
    scaled = RecGraph(
        flavor=graph.flavor,
        nodes=graph.nodes,
        edges={e: w * c for e, w in graph.edges.items()},
        eta_s=graph.eta_s,
    )
    params = ParamSetting(alpha=0.3, n=5, eta_s=0.5)
    user = sorted(stream.users)[0]
    t = stream.omega
    base = recommend(graph, user, t, params, seen=set())
    other = recommend(scaled, user, t, params, seen=set())
    assert [item for item, _ in base] == [item for item, _ in other]
    # the transition matrix itself is scale-free up to rounding
    diff = (transition_matrix(graph).matrix - transition_matrix(scaled).matrix)
    assert abs(diff).max() <= 1e-15
