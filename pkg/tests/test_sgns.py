from itertools import combinations

import numpy as np
import pytest

from trendvote.cooccur import CoocGraph
from trendvote.embedding import (
    EmbeddingTable,
    TrainConfig,
    generate_walks,
    pair_gradients,
    pair_loss,
    train_skipgram,
)
from trendvote.errors import ContractViolation
from conftest import barbell_sides, cos, make_barbell


def test_gradient_matches_finite_differences():
    """Analytical gradients vs central differences at 10 random points."""
    rng = np.random.default_rng(123)
    h = 1e-6
    for _ in range(10):
        dim = int(rng.integers(3, 8))
        k = int(rng.integers(1, 6))
        v_c = rng.normal(0, 0.5, dim)
        u_o = rng.normal(0, 0.5, dim)
        u_n = rng.normal(0, 0.5, (k, dim))
        _, grad_v, grad_o, grad_negs = pair_gradients(v_c, u_o, u_n)

        def numeric(setter):
            def diff(delta):
                vc, uo, un = v_c.copy(), u_o.copy(), u_n.copy()
                setter(vc, uo, un, delta)
                return pair_loss(vc, uo, un)

            return (diff(+h) - diff(-h)) / (2 * h)

        for i in range(dim):
            got = numeric(lambda vc, uo, un, d, i=i: vc.__setitem__(i, vc[i] + d))
            assert got == pytest.approx(grad_v[i], rel=1e-4, abs=1e-8)
            got = numeric(lambda vc, uo, un, d, i=i: uo.__setitem__(i, uo[i] + d))
            assert got == pytest.approx(grad_o[i], rel=1e-4, abs=1e-8)
        for t in range(k):
            for i in range(dim):
                got = numeric(
                    lambda vc, uo, un, d, t=t, i=i: un.__setitem__((t, i), un[t, i] + d)
                )
                assert got == pytest.approx(grad_negs[t, i], rel=1e-4, abs=1e-8)


def test_two_node_cooccurrence_attracts():
    graph = CoocGraph("Physics", 2024, ("a", "b"), {("a", "b"): 1})
    cfg = TrainConfig(rng_seed=1, embedding_dim=16, epochs=10)
    table = train_skipgram(generate_walks(graph, cfg), cfg)
    assert cos(table.vectors["a"], table.vectors["b"]) > 0


def test_training_determinism_bitwise():
    graph = CoocGraph("Physics", 2024, ("a", "b", "c"), {("a", "b"): 2, ("b", "c"): 1})
    cfg = TrainConfig(rng_seed=9, embedding_dim=8, epochs=3)
    walks = generate_walks(graph, cfg)
    t1 = train_skipgram(walks, cfg)
    t2 = train_skipgram(walks, cfg)
    assert set(t1.vectors) == set(t2.vectors)
    for k in t1.vectors:
        assert np.array_equal(t1.vectors[k], t2.vectors[k])


def test_vocabulary_of_one_rejected():
    with pytest.raises(ContractViolation):
        train_skipgram([["solo", "solo", "solo"]], TrainConfig(embedding_dim=4))


def test_empty_walks_rejected():
    with pytest.raises(ContractViolation):
        train_skipgram([], TrainConfig())


def test_vectors_cover_non_isolated_nodes():
    graph = CoocGraph(
        "Physics", 2024, ("a", "b", "iso"), {("a", "b"): 1}
    )
    cfg = TrainConfig(rng_seed=0, embedding_dim=8, epochs=2)
    walks = generate_walks(graph, cfg)
    table = train_skipgram(walks, cfg, domain=graph.domain, year=graph.year)
    assert set(table.vectors) == set(graph.non_isolated_nodes())
    for vec in table.vectors.values():
        assert np.all(np.isfinite(vec))


def test_barbell_separation_and_loss(barbell_table):
    left, right = barbell_sides()
    within = [
        cos(barbell_table.vectors[a], barbell_table.vectors[b])
        for group in (left, right)
        for a, b in combinations(group, 2)
    ]
    cross = [
        cos(barbell_table.vectors[a], barbell_table.vectors[b])
        for a in left
        for b in right
    ]
    assert np.mean(within) - np.mean(cross) >= 0.2

    losses = barbell_table.epoch_losses
    assert len(losses) == 25
    for earlier, later in zip(losses[:5], losses[1:5]):
        assert later <= earlier


def test_serialization_roundtrip(tmp_path):
    graph = make_barbell(4)
    cfg = TrainConfig(rng_seed=2, embedding_dim=8, epochs=2)
    table = train_skipgram(generate_walks(graph, cfg), cfg, graph.domain, graph.year)
    path = tmp_path / "table.emb"
    table.save(path)
    loaded = EmbeddingTable.load(path)
    assert loaded.domain == table.domain
    assert loaded.year == table.year
    assert loaded.dim == table.dim
    assert set(loaded.vectors) == set(table.vectors)
    for k in table.vectors:
        assert np.allclose(loaded.vectors[k], table.vectors[k], atol=1e-6)


def test_csv_export(tmp_path):
    graph = make_barbell(3)
    cfg = TrainConfig(rng_seed=2, embedding_dim=4, epochs=1)
    table = train_skipgram(generate_walks(graph, cfg), cfg)
    path = tmp_path / "emb.csv"
    table.export_csv(path)
    lines = path.read_text(encoding="utf-8").splitlines()
    assert lines[0] == "keyword,v0,v1,v2,v3"
    assert len(lines) == 1 + len(table.vectors)


def test_config_validation():
    with pytest.raises(ContractViolation):
        TrainConfig(embedding_dim=0)
    with pytest.raises(ContractViolation):
        TrainConfig(p=0.0)
    with pytest.raises(ContractViolation):
        TrainConfig(learning_rate=-1.0)


def test_parallel_mode_runs():
    graph = make_barbell(4)
    cfg = TrainConfig(rng_seed=3, embedding_dim=8, epochs=2, parallel=True)
    table = train_skipgram(generate_walks(graph, cfg), cfg)
    assert len(table.vectors) == 8
    for vec in table.vectors.values():
        assert np.all(np.isfinite(vec))
