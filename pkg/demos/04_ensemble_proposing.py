#!/usr/bin/env python3
"""Propose candidates with a mock six-model ensemble and consolidate by vote."""

from trendvote.agents import AgentClient, AgentEndpoint, MockTable, consolidate_contexts, run_deep_research
from trendvote.config import mock_endpoint_roster
from trendvote.corpus import Keyword, WorkRecord
from trendvote.propose import (
    assemble_breakthrough_prompt,
    cross_model_vote,
    merge_pools,
    propose_candidates,
    select_top_pool,
)
from trendvote import simulator

# a mock client: canned table lookups, a deterministic synthesizer as fallback
client = AgentClient(mock_table=MockTable(responder=simulator.respond))
roster = mock_endpoint_roster()
print(f"proposal models: {[e.endpoint_id for e in roster.proposal]}")

# 1. supplementary research context: two regions, then one consolidation
doc_us = run_deep_research(client, roster.research[0], "breakthrough_2025")
doc_cn = run_deep_research(client, roster.research[1], "breakthrough_2025")
context = consolidate_contexts(client, doc_us, doc_cn, roster.consolidator)
print(f"consolidated context {context.doc_id} from parents {context.parents}\n")

# 2. keyword-grounded prompts with high-citation literature
works = [
    WorkRecord(f"W{i}", f"Influential study {i}", 2025, "Physics",
               (Keyword("quantum sensing"),), 400 - 50 * i)
    for i in range(3)
]
bundles = [
    assemble_breakthrough_prompt(
        "quantum sensing", works, context, "Physics", 2025, count=20
    )
]

# 3. each model proposes its own list; the union is the raw pool
reports = [
    propose_candidates(client, ep, bundles, target_count=20) for ep in roster.proposal
]
pool = merge_pools(reports, "breakthrough", "Physics")
print(f"raw pool: {len(pool.candidates)} distinct candidates from 6 models")

# 4. cross-model approval voting filters the pool
vote = cross_model_vote(client, pool, roster.proposal, votes_per_model=30, rng_seed=0)
print(f"ballots: {vote.valid_ballots} valid, votes per ballot: {vote.votes_per_ballot}")
assert sum(vote.tally.values()) == vote.valid_ballots * vote.votes_per_ballot

top = select_top_pool(pool, vote.tally, k=10)
print("\ntop candidates by aggregate approvals:")
for cand in top.candidates[:5]:
    print(f"  {vote.tally[cand.candidate_id]} votes  {cand.text[:60]}")
print(f"\nno live network calls were made: {client.live_transport.calls == 0}")
