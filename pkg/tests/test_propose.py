import json

import pytest

from trendvote.agents import AgentEndpoint, ContextDocument
from trendvote.corpus import Keyword, WorkRecord
from trendvote.errors import ContractViolation, EnsembleFailure
from trendvote.propose import (
    Candidate,
    CandidatePool,
    NO_LITERATURE_MARKER,
    assemble_breakthrough_prompt,
    assemble_question_prompt,
    cross_model_vote,
    merge_pools,
    propose_candidates,
    select_top_pool,
)
from trendvote.util import candidate_id, stable_hash
from conftest import mock_client


EP = AgentEndpoint(endpoint_id="m1", provider_kind="mock")
CTX = ContextDocument(
    doc_id="ctx1", mode="breakthrough_2025", endpoint_id="m0",
    created_at="", text="context body",
)


def make_work(work_id, title, cited=10):
    return WorkRecord(
        work_id=work_id, title=title, year=2025, domain="Physics",
        keywords=(Keyword("k"),), cited_by_count=cited,
    )


def make_pool(n, category="breakthrough", domain="Physics", tag="raw600"):
    cands = [
        Candidate.make(f"candidate text {i:03d}", category, domain, "m1")
        for i in range(n)
    ]
    return CandidatePool(category=category, domain=domain, stage_tag=tag, candidates=cands)


def test_candidate_id_tracks_normalized_text():
    a = Candidate.make("A  big   result.", "breakthrough", "Physics", "m1")
    b = Candidate.make("A big result", "breakthrough", "Physics", "m2")
    c = Candidate.make("A different result", "breakthrough", "Physics", "m1")
    assert a.candidate_id == b.candidate_id
    assert a.candidate_id != c.candidate_id
    assert candidate_id("x") == candidate_id("  x  ")


def test_candidate_validation():
    with pytest.raises(ContractViolation):
        Candidate.make("   ", "breakthrough", "Physics", "m1")
    with pytest.raises(ContractViolation):
        Candidate.make("ok", "prophecy", "Physics", "m1")


def test_breakthrough_prompt_includes_works():
    works = [make_work(f"w{i}", f"Title number {i}") for i in range(3)]
    bundle = assemble_breakthrough_prompt("quantum", works, CTX, "Physics", 2025, 7)
    for w in works:
        assert w.title in bundle.text
    assert "quantum" in bundle.text
    assert "context body" in bundle.text
    assert bundle.cited_work_ids == ("w0", "w1", "w2")
    assert bundle.count == 7


def test_breakthrough_prompt_empty_literature_marker():
    bundle = assemble_breakthrough_prompt("quantum", [], CTX, "Physics", 2025, 5)
    assert NO_LITERATURE_MARKER in bundle.text


def test_question_prompt_two_sections():
    recent = [make_work("r1", "Recent title")]
    foundational = [make_work("f1", "Foundational title")]
    bundle = assemble_question_prompt(
        "quantum", recent, foundational, CTX, "Physics", 2026, 5
    )
    assert "Recent title" in bundle.text
    assert "Foundational title" in bundle.text
    assert bundle.text.index("RECENT") < bundle.text.index("FOUNDATIONAL")
    assert bundle.cited_work_ids == ("r1", "f1")


def test_prompt_hash_stable():
    b1 = assemble_breakthrough_prompt("quantum", [], CTX, "Physics", 2025, 5)
    b2 = assemble_breakthrough_prompt("quantum", [], CTX, "Physics", 2025, 5)
    assert stable_hash(b1.text) == stable_hash(b2.text)
    assert b1.template_hash == b2.template_hash


def _bundles(n, count):
    return [
        assemble_breakthrough_prompt(f"kw{i}", [], CTX, "Physics", 2025, count)
        for i in range(n)
    ]


def test_propose_exactly_100():
    def ten_per_prompt(endpoint_id, prompt, hints):
        tag = stable_hash(endpoint_id, prompt)[:6]
        return json.dumps(
            {"candidates": [f"candidate {tag} {i}" for i in range(hints["count"])]}
        )

    client = mock_client(responder=ten_per_prompt)
    report = propose_candidates(client, EP, _bundles(10, 10), target_count=100)
    assert len(report.candidates) == 100
    assert not report.shortfall
    assert len({c.candidate_id for c in report.candidates}) == 100
    assert all(c.source_model == "m1" for c in report.candidates)


def test_propose_dedup_across_prompts():
    def same_every_time(endpoint_id, prompt, hints):
        return json.dumps({"candidates": ["identical claim", "identical claim."]})

    client = mock_client(responder=same_every_time)
    report = propose_candidates(client, EP, _bundles(4, 2), target_count=8)
    assert len(report.candidates) == 1
    assert report.shortfall


def test_propose_all_unparseable():
    client = mock_client(responder=lambda e, p, h: "no json here")
    report = propose_candidates(client, EP, _bundles(3, 5), target_count=15)
    assert report.candidates == []
    assert report.shortfall
    assert len(report.warnings) == 3


def test_propose_requires_prompts():
    with pytest.raises(ContractViolation):
        propose_candidates(mock_client(), EP, [], target_count=10)


def test_merge_pools_dedups():
    a = Candidate.make("one", "breakthrough", "Physics", "m1")
    b = Candidate.make("one", "breakthrough", "Physics", "m2")
    c = Candidate.make("two", "breakthrough", "Physics", "m2")
    from trendvote.propose import ProposeReport

    merged = merge_pools(
        [ProposeReport([a]), ProposeReport([b, c])], "breakthrough", "Physics"
    )
    assert len(merged.candidates) == 2
    assert merged.candidates[0].source_model == "m1"  # first occurrence retained


def endpoints(n):
    return [AgentEndpoint(endpoint_id=f"model{i}", provider_kind="mock") for i in range(n)]


def test_cross_vote_agreeing_models():
    pool = make_pool(150)
    chosen = sorted(pool.ids())[:100]

    def approve_fixed(endpoint_id, prompt, hints):
        return json.dumps({"approve": chosen})

    client = mock_client(responder=approve_fixed)
    report = cross_model_vote(client, pool, endpoints(2), votes_per_model=100)
    assert report.valid_ballots == 2
    assert sum(report.tally.values()) == 200
    for cid in pool.ids():
        assert report.tally[cid] == (2 if cid in chosen else 0)


def test_cross_vote_invalid_ballot_dropped():
    pool = make_pool(10)
    good = sorted(pool.ids())[:5]

    def responder(endpoint_id, prompt, hints):
        if endpoint_id == "model0":
            return json.dumps({"approve": good[:3]})  # wrong count, every attempt
        return json.dumps({"approve": good})

    client = mock_client(responder=responder)
    report = cross_model_vote(client, pool, endpoints(3), votes_per_model=5)
    assert report.dropped == ["model0"]
    assert report.valid_ballots == 2
    assert sum(report.tally.values()) == 10
    assert client.mock_calls == 3 + 2  # three failed attempts plus two clean ballots


def test_cross_vote_single_candidate_forced():
    pool = make_pool(1)
    client = mock_client()  # simulator picks min(votes, pool)
    report = cross_model_vote(client, pool, endpoints(4), votes_per_model=100)
    only = pool.ids()[0]
    assert report.votes_per_ballot == 1
    assert report.tally[only] == 4


def test_cross_vote_all_dropped():
    pool = make_pool(5)
    client = mock_client(responder=lambda e, p, h: "garbage")
    with pytest.raises(EnsembleFailure):
        cross_model_vote(client, pool, endpoints(2), votes_per_model=3)


def test_cross_vote_conservation_and_determinism():
    pool = make_pool(60)
    report1 = cross_model_vote(mock_client(), pool, endpoints(6), votes_per_model=25)
    report2 = cross_model_vote(mock_client(), pool, endpoints(6), votes_per_model=25)
    assert report1.tally == report2.tally
    assert sum(report1.tally.values()) == report1.valid_ballots * 25


def test_select_top_pool_tie_rule():
    pool = make_pool(3)
    ids = pool.ids()
    tally = {ids[0]: 3, ids[1]: 3, ids[2]: 1}
    a, b = sorted([ids[0], ids[1]])
    top = select_top_pool(pool, tally, k=2)
    assert top.ids() == [a, b]
    assert "boundary_tie" not in top.flags


def test_select_top_pool_boundary_tie_flagged():
    pool = make_pool(4)
    ids = sorted(pool.ids())
    tally = {ids[0]: 5, ids[1]: 2, ids[2]: 2, ids[3]: 2}
    top = select_top_pool(pool, tally, k=2)
    assert "boundary_tie" in top.flags
    assert top.ids() == [ids[0], ids[1]]


def test_select_top_pool_small_pool_flagged():
    pool = make_pool(30)
    tally = {cid: 1 for cid in pool.ids()}
    top = select_top_pool(pool, tally, k=100)
    assert len(top.candidates) == 30
    assert "short_pool" in top.flags


def test_pool_size_contracts():
    with pytest.raises(ContractViolation):
        make_pool(101, tag="pool100")
    small = make_pool(20, tag="short30")
    assert "short_pool" in small.flags


def test_pool_save_load_roundtrip(tmp_path):
    pool = make_pool(5, tag="raw600")
    pool.save(tmp_path / "pool.jsonl")
    loaded = CandidatePool.load(tmp_path / "pool.jsonl")
    assert loaded.ids() == pool.ids()
    assert loaded.category == pool.category
    assert loaded.stage_tag == "raw600"
