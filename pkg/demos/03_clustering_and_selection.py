#!/usr/bin/env python3
"""Cluster keywords by hotness priority and pick the seed keyword sets."""

import tempfile
from pathlib import Path

from trendvote.cooccur import graph_from_slice
from trendvote.corpus import CorpusStore, load_domain_map
from trendvote.embedding import TrainConfig, embed_graph
from trendvote.fixtures import FixtureSpec, generate_fixture
from trendvote.hotness import (
    HotnessParams,
    bandwidth_from_percentile,
    compute_hotness,
    rank_change,
    sample_pairwise_distances,
)
from trendvote.trends import (
    SelectionThresholds,
    cluster_by_hotness_priority,
    select_breakthrough_keywords,
    select_question_keywords,
)

workdir = Path(tempfile.mkdtemp(prefix="trendvote-demo-"))
generate_fixture(workdir, FixtureSpec(seed=0))
store = CorpusStore(load_domain_map(workdir / "domain_map.csv"))
store.ingest_works(workdir / "works.ndjson")

domain = "Biology"
cfg = TrainConfig(embedding_dim=32, walk_length=10, num_walks=5, epochs=5, rng_seed=0)
params = HotnessParams(sample_size=20000, rng_seed=0)

hotness = {}
tables = {}
for year in (2024, 2025):
    table = embed_graph(graph_from_slice(store, domain, year), cfg)
    sample = sample_pairwise_distances(table, params)
    sigma = bandwidth_from_percentile(sample, params.sigma_perc_1)
    hotness[year] = compute_hotness(table, store.keyword_frequencies(domain, year), sigma)
    tables[year] = (table, sample)
    print(f"{domain}/{year}: {len(hotness[year].rank)} ranked keywords, sigma={sigma:.5f}")

thresholds = SelectionThresholds()
table, sample = tables[2025]
clusters = cluster_by_hotness_priority(hotness[2025], table, thresholds, sample)
print(f"\ndistance threshold: {clusters.distance_threshold:.5f}")
print(f"{len(clusters.clusters)} clusters, {len(clusters.unassigned)} unassigned")
for i, cluster in enumerate(clusters.clusters[:5], start=1):
    members = ", ".join(cluster.members[:4])
    more = "..." if len(cluster.members) > 4 else ""
    print(f"  cluster {i} (seed rank {hotness[2025].rank[cluster.seed]}): {members}{more}")

# breakthrough keywords: prominent last year AND rising this year
breakthrough = select_breakthrough_keywords(
    hotness[2024].rank, hotness[2025].rank, thresholds
)
print(f"\nbreakthrough keywords ({len(breakthrough)}): {', '.join(breakthrough[:6])}...")

# question keywords from the top clusters: high rank and high acceleration
delta = rank_change(hotness[2024], hotness[2025])
questions = select_question_keywords(clusters, hotness[2025].rank, delta, thresholds)
print(f"question set 1 (absolute): {', '.join(questions.set_1)}")
print(f"question set 2 (momentum): {', '.join(questions.set_2)}")
