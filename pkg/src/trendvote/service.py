"""HTTP ballot service: session metadata, ballot submission, post-close tallies.

Voters authenticate with bearer tokens mapped to voter_ids through a roster
file; there is no self-registration. Tallies stay hidden until a session is
closed. Session creation and closing require a roster entry flagged admin.
"""

from __future__ import annotations

import json
from pathlib import Path

from fastapi import Depends, FastAPI, HTTPException, Request
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel, Field

from .agents import VoterProfile
from .ballot import (
    Ballot,
    SessionStore,
    VotingRule,
    create_session,
    tally,
)
from .errors import ContractViolation, EmptyTallyError
from .propose import Candidate, CandidatePool
from .util import stable_hash


class RosterEntry(BaseModel):
    token: str
    voter_id: str
    kind: str = "human"
    level: str = "graduate"
    role: str = ""
    specialization: str = ""
    background: str = ""
    admin: bool = False


def load_roster(path: Path | str) -> dict[str, RosterEntry]:
    with open(path, "r", encoding="utf-8") as f:
        data = json.load(f)
    entries = [RosterEntry(**e) for e in data["voters"]]
    return {e.token: e for e in entries}


class CandidateIn(BaseModel):
    candidate_id: str
    text: str
    category: str
    domain: str
    source_model: str = ""
    seed_keywords: list[str] = Field(default_factory=list)
    cited_work_ids: list[str] = Field(default_factory=list)


class PanelistIn(BaseModel):
    voter_id: str
    kind: str
    level: str
    role: str = ""
    specialization: str = ""
    background: str = ""


class RuleIn(BaseModel):
    kind: str
    votes_per_voter: int = 0
    weight_human: float = 1.0
    weight_ai: float = 1.0
    advance_count: int = 30
    induct_count: int = 0


class SessionCreateIn(BaseModel):
    category: str
    domain: str
    stage: str
    pool_tag: str
    candidates: list[CandidateIn]
    panel: list[PanelistIn]
    rule: RuleIn
    rng_seed: int = 0
    session_id: str = ""


class BallotIn(BaseModel):
    selections: list[str]


def create_app(
    store: SessionStore,
    roster: dict[str, RosterEntry],
    static_dir: Path | str | None = None,
) -> FastAPI:
    app = FastAPI(title="trendvote ballot service")

    def authed(request: Request) -> RosterEntry:
        header = request.headers.get("authorization", "")
        if not header.lower().startswith("bearer "):
            raise HTTPException(status_code=401, detail="missing bearer token")
        entry = roster.get(header[7:].strip())
        if entry is None:
            raise HTTPException(status_code=401, detail="unknown token")
        return entry

    def admin_only(entry: RosterEntry = Depends(authed)) -> RosterEntry:
        if not entry.admin:
            raise HTTPException(status_code=403, detail="admin token required")
        return entry

    def get_session(session_id: str):
        try:
            return store.get(session_id)
        except KeyError:
            raise HTTPException(status_code=404, detail="unknown session")

    @app.post("/sessions")
    def post_session(body: SessionCreateIn, _: RosterEntry = Depends(admin_only)):
        try:
            pool = CandidatePool(
                category=body.category,
                domain=body.domain,
                stage_tag=body.pool_tag,
                candidates=[
                    Candidate(
                        candidate_id=c.candidate_id,
                        text=c.text,
                        category=c.category,
                        domain=c.domain,
                        source_model=c.source_model,
                        seed_keywords=tuple(c.seed_keywords),
                        cited_work_ids=tuple(c.cited_work_ids),
                    )
                    for c in body.candidates
                ],
            )
            session = create_session(
                category=body.category,
                domain=body.domain,
                stage=body.stage,
                pool=pool,
                panel=[VoterProfile.from_dict(p.model_dump()) for p in body.panel],
                rule=VotingRule(**body.rule.model_dump()),
                rng_seed=body.rng_seed,
                session_id=body.session_id,
            )
            store.add(session)
        except ContractViolation as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        return {"session_id": session.session_id, "status": session.status}

    @app.get("/sessions/{session_id}")
    def get_meta(session_id: str, _: RosterEntry = Depends(authed)):
        session = get_session(session_id)
        return {
            "session_id": session.session_id,
            "category": session.category,
            "domain": session.domain,
            "stage": session.stage,
            "status": session.status,
            "rule": session.rule.as_dict(),
            "candidate_count": len(session.pool.candidates),
            "ballot_count": len(session.ballots),
        }

    @app.get("/sessions/{session_id}/candidates")
    def get_candidates(session_id: str, _: RosterEntry = Depends(authed)):
        session = get_session(session_id)
        by_id = session.pool.by_id()
        return {
            "session_id": session.session_id,
            "rule": session.rule.as_dict(),
            "status": session.status,
            "candidates": [
                {"candidate_id": cid, "text": by_id[cid].text}
                for cid in session.presentation_order
            ],
        }

    @app.post("/sessions/{session_id}/ballots")
    def post_ballot(
        session_id: str, body: BallotIn, entry: RosterEntry = Depends(authed)
    ):
        get_session(session_id)
        ballot = Ballot(
            voter_id=entry.voter_id,
            selections=tuple(body.selections),
            submitted_at="",
        )
        result = store.submit(session_id, ballot)
        if not result.accepted:
            return {"accepted": False, "reason": result.reason}
        receipt = stable_hash("receipt", session_id, entry.voter_id, *body.selections)[:16]
        return {"accepted": True, "receipt": receipt}

    @app.post("/sessions/{session_id}/close")
    def post_close(session_id: str, _: RosterEntry = Depends(admin_only)):
        get_session(session_id)
        store.close(session_id)
        return {"session_id": session_id, "status": "closed"}

    @app.get("/sessions/{session_id}/tally")
    def get_tally(session_id: str, _: RosterEntry = Depends(authed)):
        session = get_session(session_id)
        if session.status != "closed":
            raise HTTPException(status_code=409, detail="session still open")
        try:
            return tally(session).as_dict()
        except EmptyTallyError as exc:
            raise HTTPException(status_code=409, detail=str(exc))

    if static_dir is not None and Path(static_dir).is_dir():
        app.mount("/", StaticFiles(directory=str(static_dir), html=True), name="ui")

    return app
