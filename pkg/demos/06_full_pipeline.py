#!/usr/bin/env python3
"""The whole pipeline on a synthetic corpus: fixture -> stages -> final lists."""

import tempfile
import time
from pathlib import Path

from trendvote.agents import PanelSpec
from trendvote.config import load_config, write_default_config
from trendvote.fixtures import FixtureSpec, generate_fixture, write_roster
from trendvote.pipeline import Layout, run_all
from trendvote.propose import CandidatePool
from trendvote.util import load_json

base = Path(tempfile.mkdtemp(prefix="trendvote-demo-"))
fixture = base / "fixture"
generate_fixture(fixture, FixtureSpec(seed=0))
write_roster(fixture / "roster.json",
             [PanelSpec.defaults("screening"), PanelSpec.defaults("refinement")])
write_default_config(fixture / "config.toml", works="works.ndjson",
                     domain_map="domain_map.csv", roster="roster.json")

config = load_config(fixture / "config.toml")
print(f"domains: {', '.join(config.domains)}")
print(f"years: {config.prev_year} -> {config.curr_year}, seed {config.rng_seed}\n")

started = time.perf_counter()
for result in run_all(config):
    print(f"  {result.stage:12s} {result.status:10s} {result.manifest['duration_s']:6.1f}s")
print(f"total: {time.perf_counter() - started:.1f}s\n")

layout = Layout(config)
domain = "ArtificialIntelligence"
for category in ("breakthrough", "question"):
    inducted = CandidatePool.load(layout.pool_path("inducted2", domain, category))
    print(f"{domain} / {category}: inducted")
    for cand in inducted.candidates:
        print(f"  - {cand.text}  [from {cand.source_model}, seeds {list(cand.seed_keywords)}]")

rows = load_json(layout.report_paths(domain)[1])["rows"]
print("\nhuman-vs-AI alignment:")
for row in rows:
    print(f"  {row['category']:12s} {row['phase']}: {row['js_distance']:.3f}")

print("\nrerunning: every stage should be up-to-date")
statuses = {r.status for r in run_all(config)}
print(f"statuses: {statuses}")
