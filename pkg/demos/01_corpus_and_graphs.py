#!/usr/bin/env python3
"""Ingest a synthetic publication corpus and inspect slices and graphs."""

import tempfile
from pathlib import Path

from trendvote.cooccur import graph_from_slice
from trendvote.corpus import CorpusStore, load_domain_map
from trendvote.fixtures import FixtureSpec, generate_fixture

workdir = Path(tempfile.mkdtemp(prefix="trendvote-demo-"))
print(f"working in {workdir}\n")

# 1. generate a seeded corpus: 5 domains, 200 keywords, 1000 works
manifest = generate_fixture(workdir, FixtureSpec(seed=0))
print(f"generated {manifest['total_works']} works")
print(f"keywords per domain: {manifest['keywords_per_domain']}\n")

# 2. ingest the newline-delimited JSON into the store
store = CorpusStore(load_domain_map(workdir / "domain_map.csv"))
report = store.ingest_works(workdir / "works.ndjson")
print(f"ingest: accepted={report.accepted} rejected={report.rejected}")

# 3. keyword frequencies for one (domain, year) slice
freq = store.keyword_frequencies("ArtificialIntelligence", 2025)
top = sorted(freq.items(), key=lambda kv: -kv[1])[:5]
print("\nmost frequent AI keywords in 2025:")
for kw, n in top:
    print(f"  {n:4d}  {kw}")

# 4. most cited works carrying the top keyword
keyword = top[0][0]
works = store.top_cited_works("ArtificialIntelligence", keyword, 2025, 2025, 3)
print(f"\nmost cited 2025 works mentioning {keyword!r}:")
for w in works:
    print(f"  {w.cited_by_count:5d}  {w.title}")

# 5. the co-occurrence graph for the slice
graph = graph_from_slice(store, "ArtificialIntelligence", 2025)
print(f"\nco-occurrence graph: {len(graph.nodes)} nodes, {len(graph.edges)} edges")
print(f"isolated keywords: {len(graph.isolated_nodes())}")
heaviest = max(graph.edges.items(), key=lambda kv: kv[1])
print(f"heaviest edge: {heaviest[0][0]!r} -- {heaviest[0][1]!r} (weight {heaviest[1]})")

# 6. persistence is deterministic: save twice, bytes match
store.save(workdir / "store")
snapshot = (workdir / "store" / "index.bin").read_bytes()
store.save(workdir / "store")
assert (workdir / "store" / "index.bin").read_bytes() == snapshot
print("\nindex snapshot is byte-stable across saves")
