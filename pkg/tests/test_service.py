import threading
import time

import pytest
import requests
import uvicorn

from trendvote.agents import VoterProfile
from trendvote.ballot import SessionStore, VotingRule, create_session
from trendvote.propose import Candidate, CandidatePool
from trendvote.service import RosterEntry, create_app


def make_pool(n, tag="short30"):
    return CandidatePool(
        category="question",
        domain="Physics",
        stage_tag=tag,
        candidates=[
            Candidate.make(f"svc text {i:03d}", "question", "Physics", "m1")
            for i in range(n)
        ],
    )


def build_roster():
    entries = [
        RosterEntry(token="admin-token", voter_id="admin", admin=True),
        RosterEntry(token="tok-h1", voter_id="human-001", kind="human"),
        RosterEntry(token="tok-h2", voter_id="human-002", kind="human"),
    ]
    return {e.token: e for e in entries}


def panel():
    return [
        VoterProfile(f"human-{i:03d}", "human", "professor", "panelist", f"s{i}", "b")
        for i in (1, 2)
    ]


@pytest.fixture(scope="module")
def server(tmp_path_factory):
    store = SessionStore(tmp_path_factory.mktemp("sessions"))
    session = create_session(
        category="question",
        domain="Physics",
        stage="refinement",
        pool=make_pool(30),
        panel=panel(),
        rule=VotingRule.refinement(),
        rng_seed=3,
        session_id="svc-test-session",
    )
    store.add(session)
    app = create_app(store, build_roster())
    config = uvicorn.Config(app, host="127.0.0.1", port=0, log_level="error")
    server = uvicorn.Server(config)
    thread = threading.Thread(target=server.run, daemon=True)
    thread.start()
    for _ in range(100):
        if server.started:
            break
        time.sleep(0.05)
    assert server.started
    host, port = server.servers[0].sockets[0].getsockname()[:2]
    yield f"http://{host}:{port}", store, session
    server.should_exit = True
    thread.join(timeout=5)


def auth(token):
    return {"Authorization": f"Bearer {token}"}


def test_requires_token(server):
    base, _, _ = server
    assert requests.get(f"{base}/sessions/svc-test-session").status_code == 401
    bad = requests.get(f"{base}/sessions/svc-test-session", headers=auth("nope"))
    assert bad.status_code == 401


def test_metadata_and_candidate_order(server):
    base, _, session = server
    meta = requests.get(
        f"{base}/sessions/svc-test-session", headers=auth("tok-h1")
    ).json()
    assert meta["status"] == "open"
    assert meta["rule"]["votes_per_voter"] == 10
    assert meta["candidate_count"] == 30

    body = requests.get(
        f"{base}/sessions/svc-test-session/candidates", headers=auth("tok-h1")
    ).json()
    assert [c["candidate_id"] for c in body["candidates"]] == session.presentation_order


def test_unknown_session_404(server):
    base, _, _ = server
    r = requests.get(f"{base}/sessions/who-knows", headers=auth("tok-h1"))
    assert r.status_code == 404


def test_tally_hidden_while_open(server):
    base, _, _ = server
    r = requests.get(f"{base}/sessions/svc-test-session/tally", headers=auth("tok-h1"))
    assert r.status_code == 409


def test_ballot_rejections_and_acceptance(server):
    base, _, session = server
    ids = session.presentation_order

    r = requests.post(
        f"{base}/sessions/svc-test-session/ballots",
        headers=auth("tok-h1"),
        json={"selections": ids[:9]},
    ).json()
    assert r == {"accepted": False, "reason": "wrong selection count"}

    r = requests.post(
        f"{base}/sessions/svc-test-session/ballots",
        headers=auth("tok-h1"),
        json={"selections": ids[:10]},
    ).json()
    assert r["accepted"] is True
    assert r["receipt"]

    r = requests.post(
        f"{base}/sessions/svc-test-session/ballots",
        headers=auth("tok-h1"),
        json={"selections": ids[10:20]},
    ).json()
    assert r == {"accepted": False, "reason": "duplicate voter"}


def test_close_requires_admin_then_tally(server):
    base, _, session = server
    ids = session.presentation_order
    requests.post(
        f"{base}/sessions/svc-test-session/ballots",
        headers=auth("tok-h2"),
        json={"selections": ids[5:15]},
    )

    denied = requests.post(
        f"{base}/sessions/svc-test-session/close", headers=auth("tok-h1")
    )
    assert denied.status_code == 403

    closed = requests.post(
        f"{base}/sessions/svc-test-session/close", headers=auth("admin-token")
    )
    assert closed.status_code == 200

    t = requests.get(
        f"{base}/sessions/svc-test-session/tally", headers=auth("tok-h1")
    ).json()
    assert t["turnout"] == {"human": 2, "ai": 0}
    assert len(t["rows"]) == 30

    late = requests.post(
        f"{base}/sessions/svc-test-session/ballots",
        headers=auth("tok-h2"),
        json={"selections": ids[:10]},
    ).json()
    assert late == {"accepted": False, "reason": "closed session"}


def test_session_create_via_api(server):
    base, store, _ = server
    pool = make_pool(100, tag="pool100")
    body = {
        "category": "question",
        "domain": "Physics",
        "stage": "screening",
        "pool_tag": "pool100",
        "candidates": [c.as_dict() for c in pool.candidates],
        "panel": [
            {"voter_id": "human-001", "kind": "human", "level": "graduate"},
            {"voter_id": "human-002", "kind": "human", "level": "graduate"},
        ],
        "rule": VotingRule.screening().as_dict(),
        "rng_seed": 9,
        "session_id": "svc-created",
    }
    denied = requests.post(f"{base}/sessions", headers=auth("tok-h1"), json=body)
    assert denied.status_code == 403
    created = requests.post(f"{base}/sessions", headers=auth("admin-token"), json=body)
    assert created.status_code == 200
    assert created.json() == {"session_id": "svc-created", "status": "open"}
    assert store.get("svc-created").rule.kind == "approval_unlimited"

    mismatch = dict(body, stage="refinement", session_id="svc-bad")
    r = requests.post(f"{base}/sessions", headers=auth("admin-token"), json=mismatch)
    assert r.status_code == 422
