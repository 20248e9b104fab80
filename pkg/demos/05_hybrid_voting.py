#!/usr/bin/env python3
"""Run the two-stage hybrid vote: screening 100->30, refinement 30->10->2."""

from trendvote.agents import AgentClient, AgentEndpoint, MockTable, PanelSpec, instantiate_panel
from trendvote.analysis import alignment_report, js_distance, vote_distribution
from trendvote.ballot import (
    Ballot,
    VotingRule,
    advance,
    close_session,
    collect_ai_ballots,
    create_session,
    submit_ballot,
    tally,
)
from trendvote.fixtures import synthetic_human_panel
from trendvote.propose import Candidate, CandidatePool
from trendvote import simulator

client = AgentClient(mock_table=MockTable(responder=simulator.respond))
chair = AgentEndpoint(endpoint_id="chair", provider_kind="mock")
voter_ep = AgentEndpoint(endpoint_id="voter", provider_kind="mock")

pool100 = CandidatePool(
    category="question",
    domain="ArtificialIntelligence",
    stage_tag="pool100",
    candidates=[
        Candidate.make(f"Open question {i:03d} on learning systems", "question",
                       "ArtificialIntelligence", "demo")
        for i in range(100)
    ],
)


def run_stage(stage, pool, rule, spec):
    panel = synthetic_human_panel(spec) + instantiate_panel(client, chair, spec)
    session = create_session("question", "ArtificialIntelligence", stage, pool,
                             panel, rule, rng_seed=7)
    report = collect_ai_ballots(client, session, voter_ep)
    for profile in panel:
        if profile.kind != "human":
            continue
        picks = simulator.synth_selections(
            profile.voter_id, session.presentation_order,
            rule.kind, rule.votes_per_voter, style="human",
        )
        submit_ballot(session, Ballot(profile.voter_id, tuple(picks)))
    close_session(session)
    t = tally(session)
    print(f"{stage}: {len(panel)} voters ({spec.human_count} human + {spec.ai_count} ai), "
          f"{report.accepted} ai ballots, turnout {t.turnout}")
    return session, t


# stage 1: approval voting, equal weights, 100 -> 30
s1, t1 = run_stage("screening", pool100, VotingRule.screening(),
                   PanelSpec.defaults("screening"))
short30 = advance(s1, t1).pool
print(f"  advanced {len(short30.candidates)} candidates\n")

# stage 2: limited voting, exactly 10 votes each, human weight 7, 30 -> 10 (+2)
s2, t2 = run_stage("refinement", short30, VotingRule.refinement(),
                   PanelSpec.defaults("refinement"))
result = advance(s2, t2)
print(f"  shortlisted {len(result.pool.candidates)}, inducted {len(result.inducted.candidates)}")
for cand in result.inducted.candidates:
    row = t2.row(cand.candidate_id)
    print(f"    weighted {row.weighted_score:6.1f} (h={row.raw_human}, a={row.raw_ai})  {cand.text}")

# how aligned were humans and AI voters?
print("\nhuman-vs-AI Jensen-Shannon distance per stage:")
for session, t in ((s1, t1), (s2, t2)):
    d = js_distance(vote_distribution(t, "human"), vote_distribution(t, "ai"))
    print(f"  {session.stage}: {d:.3f}")

rows = alignment_report([s1, s2])
for row in rows:
    print(f"  report row: {row.category} {row.phase} -> {row.js_distance:.3f}")
