import math

import numpy as np
import pytest

from trendvote.hotness import HotnessTable, cosine_distance
from trendvote.trends import (
    SelectionThresholds,
    cluster_by_hotness_priority,
    select_breakthrough_keywords,
    select_question_keywords,
)
from trendvote.trends import Cluster, ClusterSet
from trendvote.errors import ContractViolation
from conftest import make_table


def hotness_for(ranks: dict[str, int], domain="Physics", year=2025) -> HotnessTable:
    n = len(ranks)
    scores = {k: float(n - r + 1) for k, r in ranks.items()}
    return HotnessTable(domain, year, scores, dict(ranks))


def sample_with_threshold(threshold: float) -> np.ndarray:
    # nearest-rank at a low quantile hits the first element
    return np.array([threshold] + [1.9] * 999)


def unit_at_angle(theta: float) -> list[float]:
    return [math.cos(theta), math.sin(theta), 0.0]


def test_cluster_hand_trace():
    """A absorbs B (close), C is far from A and seeds its own cluster."""
    table = make_table(
        {
            "a": unit_at_angle(0.0),
            "b": unit_at_angle(math.acos(0.9)),   # d(a,b) = 0.1
            "c": unit_at_angle(math.acos(0.1)),   # d(a,c) = 0.9, d(b,c) ~ 0.9 too
        }
    )
    hot = hotness_for({"a": 1, "b": 2, "c": 3})
    thr = SelectionThresholds(sigma_perc_2=0.0005, kw_hotness_threshold=0.999)
    clusters = cluster_by_hotness_priority(
        hot, table, thr, sample_with_threshold(0.2)
    )
    assert clusters.distance_threshold == pytest.approx(0.2)
    assert [c.seed for c in clusters.clusters] == ["a", "c"]
    assert clusters.clusters[0].members == ["a", "b"]
    assert clusters.clusters[1].members == ["c"]
    assert clusters.unassigned == []


def test_cluster_single_absorbing_seed():
    table = make_table(
        {f"k{i}": unit_at_angle(0.001 * i) for i in range(6)}
    )
    hot = hotness_for({f"k{i}": i + 1 for i in range(6)})
    thr = SelectionThresholds(kw_hotness_threshold=0.999)
    clusters = cluster_by_hotness_priority(hot, table, thr, sample_with_threshold(0.5))
    assert len(clusters.clusters) == 1
    assert clusters.clusters[0].seed == "k0"
    assert sorted(clusters.clusters[0].members) == sorted(table.vectors)


def test_cluster_vanishing_threshold_singletons():
    # distinct vectors with pairwise distances far above a vanishing threshold
    table = make_table({f"k{i}": unit_at_angle(0.4 * i) for i in range(5)})
    hot = hotness_for({f"k{i}": i + 1 for i in range(5)})
    thr = SelectionThresholds(kw_hotness_threshold=0.4)  # ceil(0.4*5) = 2 seeds
    clusters = cluster_by_hotness_priority(
        hot, table, thr, sample_with_threshold(1e-300)
    )
    assert [c.seed for c in clusters.clusters] == ["k0", "k1"]
    assert all(c.members == [c.seed] for c in clusters.clusters)
    assert clusters.unassigned == ["k2", "k3", "k4"]


def test_cluster_isolated_keywords_unassigned():
    table = make_table({"a": unit_at_angle(0), "b": unit_at_angle(1.0)})
    hot = hotness_for({"a": 1, "b": 2, "no-vector": 3})
    thr = SelectionThresholds(kw_hotness_threshold=0.9)
    clusters = cluster_by_hotness_priority(hot, table, thr, sample_with_threshold(0.1))
    assert "no-vector" in clusters.unassigned


def test_cluster_requires_ranks():
    table = make_table({"a": unit_at_angle(0), "b": unit_at_angle(1.0)})
    hot = hotness_for({"a": 1})
    with pytest.raises(ContractViolation):
        cluster_by_hotness_priority(
            hot, table, SelectionThresholds(), sample_with_threshold(0.1)
        )


def _random_cluster_fixture(seed: int):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(20, 60))
    dim = 8
    vectors = {f"kw{i:03d}": rng.normal(0, 1, dim).tolist() for i in range(n)}
    table = make_table(vectors)
    order = sorted(vectors)
    rng.shuffle(order)
    ranks = {k: i + 1 for i, k in enumerate(order)}
    hot = hotness_for(ranks)
    thr = SelectionThresholds(kw_hotness_threshold=float(rng.uniform(0.1, 0.9)))
    threshold = float(rng.uniform(0.2, 1.0))
    clusters = cluster_by_hotness_priority(
        hot, table, thr, sample_with_threshold(threshold)
    )
    return table, hot, thr, clusters


@pytest.mark.parametrize("seed", range(5))
def test_cluster_invariants_random(seed):
    table, hot, thr, clusters = _random_cluster_fixture(seed)
    threshold = clusters.distance_threshold
    seeds = [c.seed for c in clusters.clusters]
    # member proximity to own seed
    for cluster in clusters.clusters:
        assert cluster.members[0] == cluster.seed
        for member in cluster.members:
            assert (
                cosine_distance(table.vectors[member], table.vectors[cluster.seed])
                < threshold
            )
    # pairwise seed separation
    for i, s in enumerate(seeds):
        for t in seeds[i + 1:]:
            assert cosine_distance(table.vectors[s], table.vectors[t]) >= threshold
    # clusters ordered by seed rank; seed is its cluster's hottest member
    seed_ranks = [hot.rank[s] for s in seeds]
    assert seed_ranks == sorted(seed_ranks)
    for cluster in clusters.clusters:
        assert hot.rank[cluster.seed] == min(hot.rank[m] for m in cluster.members)


def test_cluster_order_stability():
    rng = np.random.default_rng(33)
    vectors = {f"kw{i:02d}": rng.normal(0, 1, 6).tolist() for i in range(20)}
    hot = hotness_for({k: i + 1 for i, k in enumerate(sorted(vectors))})
    thr = SelectionThresholds(kw_hotness_threshold=0.3)
    sample = sample_with_threshold(0.6)

    t1 = make_table(vectors)
    shuffled_items = list(vectors.items())
    rng.shuffle(shuffled_items)
    t2 = make_table(dict(shuffled_items))
    c1 = cluster_by_hotness_priority(hot, t1, thr, sample)
    c2 = cluster_by_hotness_priority(hot, t2, thr, sample)
    assert [c.members for c in c1.clusters] == [c.members for c in c2.clusters]
    assert c1.unassigned == c2.unassigned


# -- breakthrough selection -----------------------------------------------------


def test_breakthrough_rule_trace():
    prev = {"a": 3, "b": 60, "c": 10}
    curr = {"a": 2, "b": 40, "c": 15}
    thr = SelectionThresholds(kw_breakthrough_threshold=50)
    assert select_breakthrough_keywords(prev, curr, thr) == ("a",)


def test_breakthrough_empty_overlap():
    thr = SelectionThresholds()
    assert select_breakthrough_keywords({"a": 1}, {"b": 1}, thr) == ()


def test_breakthrough_requires_strict_rise():
    thr = SelectionThresholds()
    assert select_breakthrough_keywords({"a": 5}, {"a": 5}, thr) == ()
    assert select_breakthrough_keywords({"a": 5}, {"a": 6}, thr) == ()
    assert select_breakthrough_keywords({"a": 5}, {"a": 4}, thr) == ("a",)


@pytest.mark.parametrize("seed", range(10))
def test_breakthrough_monotone_in_threshold(seed):
    rng = np.random.default_rng(seed)
    n = 40
    kws = [f"kw{i:02d}" for i in range(n)]
    prev_order = list(kws)
    rng.shuffle(prev_order)
    curr_order = list(kws)
    rng.shuffle(curr_order)
    prev = {k: i + 1 for i, k in enumerate(prev_order)}
    curr = {k: i + 1 for i, k in enumerate(curr_order)}
    chosen = {}
    for cutoff in (5, 10, 20, 40):
        thr = SelectionThresholds(kw_breakthrough_threshold=cutoff)
        chosen[cutoff] = set(select_breakthrough_keywords(prev, curr, thr))
    assert chosen[5] <= chosen[10] <= chosen[20] <= chosen[40]


# -- question selection -----------------------------------------------------------


def cluster_set(clusters, domain="Physics", year=2025, threshold=0.3):
    return ClusterSet(
        domain=domain,
        year=year,
        distance_threshold=threshold,
        clusters=[Cluster(seed=c[0], members=list(c)) for c in clusters],
        unassigned=[],
    )


def test_question_within_pool_ranks():
    clusters = cluster_set([["a", "b", "c"]])
    rank = {"a": 1, "b": 8, "c": 3}
    thr = SelectionThresholds(cluster_hotness_threshold=5, kw_question_threshold=2)
    result = select_question_keywords(clusters, rank, {}, thr)
    assert result.set_1 == ("a", "c")
    assert not result.no_eligible_clusters


def test_question_delta_tiebreak_by_name():
    clusters = cluster_set([["a", "d", "b", "c"]])
    rank = {"a": 1, "b": 2, "c": 3, "d": 4}
    delta = {k: 0 for k in rank}
    thr = SelectionThresholds(cluster_hotness_threshold=5, kw_question_threshold=2)
    result = select_question_keywords(clusters, rank, delta, thr)
    assert result.set_2 == ("a", "b")


def test_question_no_eligible_clusters():
    clusters = cluster_set([["z", "y"]])
    rank = {"z": 50, "y": 60}
    thr = SelectionThresholds(cluster_hotness_threshold=5)
    result = select_question_keywords(clusters, rank, {}, thr)
    assert result.set_1 == () and result.set_2 == ()
    assert result.no_eligible_clusters


def test_question_pool_spans_eligible_clusters_only():
    clusters = cluster_set([["a", "b"], ["z", "y"]])
    rank = {"a": 1, "b": 9, "z": 40, "y": 41}
    thr = SelectionThresholds(cluster_hotness_threshold=5, kw_question_threshold=3)
    result = select_question_keywords(clusters, rank, {"b": 12}, thr)
    assert set(result.set_1) == {"a", "b"}
    assert "z" not in result.set_1 and "z" not in result.set_2


def test_question_sets_may_overlap():
    clusters = cluster_set([["a", "b", "c"]])
    rank = {"a": 1, "b": 2, "c": 3}
    delta = {"a": 10, "b": 1, "c": 0}
    thr = SelectionThresholds(cluster_hotness_threshold=5, kw_question_threshold=2)
    result = select_question_keywords(clusters, rank, delta, thr)
    assert "a" in result.set_1 and "a" in result.set_2


def test_question_global_rank_mode():
    clusters = cluster_set([["a", "b", "c"]])
    rank = {"a": 1, "b": 8, "c": 3}
    thr = SelectionThresholds(
        cluster_hotness_threshold=5, kw_question_threshold=3, within_pool_ranks=False
    )
    result = select_question_keywords(clusters, rank, {}, thr)
    assert set(result.set_1) == {"a", "c"}  # b's global rank 8 misses the cutoff


def test_threshold_validation():
    with pytest.raises(ContractViolation):
        SelectionThresholds(kw_hotness_threshold=0.0)
    with pytest.raises(ContractViolation):
        SelectionThresholds(kw_breakthrough_threshold=0)
