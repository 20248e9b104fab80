import math
from collections import Counter

import pytest

from trendvote.cooccur import CoocGraph
from trendvote.embedding import TrainConfig, generate_walks
from trendvote.errors import ContractViolation


def path_graph(*names):
    edges = {
        tuple(sorted((a, b))): 1 for a, b in zip(names, names[1:])
    }
    return CoocGraph("Physics", 2024, tuple(sorted(names)), edges)


def star_graph(n_leaves):
    leaves = [f"leaf{i:02d}" for i in range(n_leaves)]
    edges = {tuple(sorted(("hub", leaf))): 1 for leaf in leaves}
    return CoocGraph("Physics", 2024, tuple(sorted(leaves + ["hub"])), edges)


def test_two_node_path_alternates():
    graph = path_graph("a", "b")
    walks = generate_walks(graph, TrainConfig(rng_seed=1, walk_length=8, num_walks=3))
    assert len(walks) == 6  # 3 walks from each non-isolated node
    for walk in walks:
        assert len(walk) == 8
        for prev, nxt in zip(walk, walk[1:]):
            assert {prev, nxt} == {"a", "b"}


def test_walk_determinism():
    edges = {("a", "b"): 1, ("a", "c"): 2, ("b", "c"): 3}
    graph = CoocGraph("Physics", 2024, ("a", "b", "c"), edges)
    cfg = TrainConfig(rng_seed=7)
    assert generate_walks(graph, cfg) == generate_walks(graph, cfg)


def test_isolated_nodes_excluded():
    graph = CoocGraph("Physics", 2024, ("a", "b", "iso"), {("a", "b"): 1})
    walks = generate_walks(graph, TrainConfig(rng_seed=0, num_walks=2))
    starts = {walk[0] for walk in walks}
    assert starts == {"a", "b"}
    assert all("iso" not in walk for walk in walks)


def test_walk_counts_and_length():
    graph = star_graph(4)
    cfg = TrainConfig(rng_seed=3, num_walks=5, walk_length=11)
    walks = generate_walks(graph, cfg)
    assert len(walks) == 5 * 5
    assert all(len(w) == 11 for w in walks)
    assert Counter(w[0] for w in walks) == {n: 5 for n in graph.nodes}


def test_empty_graph_rejected():
    graph = CoocGraph("Physics", 2024, (), {})
    with pytest.raises(ContractViolation):
        generate_walks(graph, TrainConfig())


def test_star_leaf_frequencies_multinomial():
    """Each leaf's visit count stays within 3 sigma of the uniform expectation."""
    n_leaves = 8
    graph = star_graph(n_leaves)
    cfg = TrainConfig(rng_seed=11, num_walks=125, walk_length=20)
    walks = generate_walks(graph, cfg)
    # transitions out of the hub across all walks
    picks = Counter()
    total = 0
    for walk in walks:
        for prev, nxt in zip(walk, walk[1:]):
            if prev == "hub":
                picks[nxt] += 1
                total += 1
    assert total >= 10_000
    p = 1.0 / n_leaves
    sigma = math.sqrt(total * p * (1 - p))
    for leaf in (f"leaf{i:02d}" for i in range(n_leaves)):
        assert abs(picks[leaf] - total * p) <= 3 * sigma


def test_edge_weights_bias_first_order():
    # hub with two leaves, weight 9 vs 1: picks should track the weights
    edges = {("hub", "x"): 9, ("hub", "y"): 1}
    graph = CoocGraph(
        "Physics", 2024, ("hub", "x", "y"), {tuple(sorted(k)): v for k, v in edges.items()}
    )
    walks = generate_walks(graph, TrainConfig(rng_seed=5, num_walks=200, walk_length=10))
    picks = Counter()
    for walk in walks:
        for prev, nxt in zip(walk, walk[1:]):
            if prev == "hub":
                picks[nxt] += 1
    total = picks["x"] + picks["y"]
    sigma = math.sqrt(total * 0.9 * 0.1)
    assert abs(picks["x"] - 0.9 * total) <= 3 * sigma


def test_uniform_weight_switch():
    edges = {("hub", "x"): 1000, ("hub", "y"): 1}
    graph = CoocGraph(
        "Physics", 2024, ("hub", "x", "y"),
        {tuple(sorted(k)): v for k, v in edges.items()},
    )
    cfg = TrainConfig(rng_seed=5, num_walks=100, walk_length=10, uniform_edge_weights=True)
    walks = generate_walks(graph, cfg)
    picks = Counter()
    for walk in walks:
        for prev, nxt in zip(walk, walk[1:]):
            if prev == "hub":
                picks[nxt] += 1
    total = picks["x"] + picks["y"]
    sigma = math.sqrt(total * 0.25)
    assert abs(picks["x"] - 0.5 * total) <= 3 * sigma


def test_high_p_suppresses_backtracking():
    # on a path a-b-c, a walk at b arriving from a returns with prob ~ (1/p)
    graph = path_graph("a", "b", "c")
    cfg = TrainConfig(rng_seed=2, num_walks=50, walk_length=12, p=1e12, q=1.0)
    walks = generate_walks(graph, cfg)
    backtracks = 0
    opportunities = 0
    for walk in walks:
        for i in range(2, len(walk)):
            if walk[i - 1] == "b":  # b has both a forward and a backtrack option
                opportunities += 1
                if walk[i] == walk[i - 2]:
                    backtracks += 1
    assert opportunities > 100
    assert backtracks == 0


def test_low_q_pushes_outward():
    # square a-b-c-d-a: from b (arrived a), c and the start a are the options;
    # with q tiny, the walk should overwhelmingly move outward to c
    names = ["a", "b", "c", "d"]
    edges = {}
    for u, v in zip(names, names[1:] + names[:1]):
        edges[tuple(sorted((u, v)))] = 1
    graph = CoocGraph("Physics", 2024, tuple(sorted(names)), edges)
    cfg = TrainConfig(rng_seed=4, num_walks=100, walk_length=10, p=1.0, q=1e-12)
    walks = generate_walks(graph, cfg)
    outward = 0
    returns = 0
    for walk in walks:
        for i in range(2, len(walk)):
            if walk[i] == walk[i - 2]:
                returns += 1
            else:
                outward += 1
    assert outward > 20 * returns
