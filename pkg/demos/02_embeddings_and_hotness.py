#!/usr/bin/env python3
"""Train keyword embeddings on one slice and rank keywords by hotness."""

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
    sample_pairwise_distances,
)

workdir = Path(tempfile.mkdtemp(prefix="trendvote-demo-"))
generate_fixture(workdir, FixtureSpec(seed=0))
store = CorpusStore(load_domain_map(workdir / "domain_map.csv"))
store.ingest_works(workdir / "works.ndjson")

graph = graph_from_slice(store, "Physics", 2025)
print(f"Physics/2025 graph: {len(graph.nodes)} nodes, {len(graph.edges)} edges")

# desk-scale training config; the defaults match the full-scale settings
cfg = TrainConfig(embedding_dim=32, walk_length=10, num_walks=5, epochs=5, rng_seed=0)
table = embed_graph(graph, cfg)
print(f"trained {len(table.vectors)} vectors of dim {table.dim}")
print(f"per-epoch loss: {[round(x, 4) for x in table.epoch_losses]}\n")

# dynamic bandwidth: a low order statistic of sampled pairwise distances
params = HotnessParams(sigma_perc_1=0.0005, sample_size=20000, rng_seed=0)
sample = sample_pairwise_distances(table, params)
sigma = bandwidth_from_percentile(sample, params.sigma_perc_1)
print(f"distance sample: min={sample[0]:.4f} median={sample[len(sample)//2]:.4f}")
print(f"bandwidth sigma (q={params.sigma_perc_1}): {sigma:.5f}\n")

freq = store.keyword_frequencies("Physics", 2025)
hot = compute_hotness(table, freq, sigma)
print("ten hottest Physics keywords of 2025:")
for kw in hot.keywords_by_rank()[:10]:
    print(f"  rank {hot.rank[kw]:3d}  score {hot.score[kw]:10.3f}  freq {freq[kw]:3d}  {kw}")

# exports used for external plotting
table.export_csv(workdir / "embeddings.csv")
hot.export_csv(workdir / "hotness.csv", freq)
print(f"\nwrote {workdir/'embeddings.csv'}")
print(f"wrote {workdir/'hotness.csv'}")
