"""Two-stage hybrid voting: sessions, ballot validation, weighted tallies.

A session freezes a candidate pool, a voter panel, a rule, and one seeded
presentation order shared by all voters. Accepted ballots are append-only and
logged to disk, so a tally can always be recomputed from the archive. The
screening stage uses unlimited approval voting with equal weights; the
refinement stage gives every voter exactly ten votes and weighs human votes
seven to one.
"""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass, field
from pathlib import Path

from .agents import AgentClient, AgentEndpoint, VoterProfile, load_template
from .errors import ContractViolation, EmptyTallyError
from .propose import CandidatePool
from .util import rng_for, stable_hash

SESSION_FORMAT_TAG = "trendvote-session/1"
BALLOT_ATTEMPTS = 3

REJECT_CLOSED = "closed session"
REJECT_UNKNOWN_VOTER = "unknown voter"
REJECT_DUPLICATE_VOTER = "duplicate voter"
REJECT_WRONG_COUNT = "wrong selection count"
REJECT_UNKNOWN_CANDIDATE = "unknown candidate"
REJECT_DUPLICATE_SELECTION = "duplicate selection"

_STAGE_POOL_TAGS = {"screening": "pool100", "refinement": "short30"}


@dataclass(frozen=True)
class VotingRule:
    kind: str  # approval_unlimited | limited_exact
    votes_per_voter: int = 0
    weight_human: float = 1.0
    weight_ai: float = 1.0
    advance_count: int = 30
    induct_count: int = 0

    def __post_init__(self):
        if self.kind not in ("approval_unlimited", "limited_exact"):
            raise ContractViolation(f"unknown rule kind {self.kind!r}")
        if self.weight_human <= 0 or self.weight_ai <= 0:
            raise ContractViolation("vote weights must be positive")
        if not self.advance_count >= self.induct_count >= 0:
            raise ContractViolation("need advance_count >= induct_count >= 0")
        if self.kind == "limited_exact" and self.votes_per_voter < 1:
            raise ContractViolation("limited voting needs votes_per_voter >= 1")

    @classmethod
    def screening(cls) -> "VotingRule":
        return cls(kind="approval_unlimited", advance_count=30, induct_count=0)

    @classmethod
    def refinement(cls) -> "VotingRule":
        return cls(
            kind="limited_exact",
            votes_per_voter=10,
            weight_human=7.0,
            weight_ai=1.0,
            advance_count=10,
            induct_count=2,
        )

    def text(self) -> str:
        if self.kind == "limited_exact":
            return (
                f"Distribute exactly {self.votes_per_voter} votes across "
                f"{self.votes_per_voter} distinct candidates."
            )
        return "Approve every candidate you judge viable: any number, at least one."

    def as_dict(self) -> dict:
        return {
            "kind": self.kind,
            "votes_per_voter": self.votes_per_voter,
            "weight_human": self.weight_human,
            "weight_ai": self.weight_ai,
            "advance_count": self.advance_count,
            "induct_count": self.induct_count,
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "VotingRule":
        return cls(**obj)


@dataclass(frozen=True)
class Ballot:
    voter_id: str
    selections: tuple[str, ...]
    submitted_at: str = ""

    def as_dict(self) -> dict:
        return {
            "voter_id": self.voter_id,
            "selections": list(self.selections),
            "submitted_at": self.submitted_at,
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "Ballot":
        return cls(
            voter_id=obj["voter_id"],
            selections=tuple(obj["selections"]),
            submitted_at=obj.get("submitted_at", ""),
        )


@dataclass
class SubmitResult:
    accepted: bool
    reason: str | None = None


@dataclass
class Session:
    session_id: str
    category: str
    domain: str
    stage: str
    pool: CandidatePool
    panel: list[VoterProfile]
    rule: VotingRule
    presentation_order: list[str]
    status: str = "open"
    ballots: list[Ballot] = field(default_factory=list)

    def voter_kinds(self) -> dict[str, str]:
        return {p.voter_id: p.kind for p in self.panel}

    def ai_members(self) -> list[VoterProfile]:
        return [p for p in self.panel if p.kind == "ai"]

    def has_voted(self, voter_id: str) -> bool:
        return any(b.voter_id == voter_id for b in self.ballots)

    def as_dict(self) -> dict:
        return {
            "format": SESSION_FORMAT_TAG,
            "session_id": self.session_id,
            "category": self.category,
            "domain": self.domain,
            "stage": self.stage,
            "status": self.status,
            "rule": self.rule.as_dict(),
            "presentation_order": self.presentation_order,
            "panel": [p.as_dict() for p in self.panel],
            "pool": {
                "category": self.pool.category,
                "domain": self.pool.domain,
                "stage_tag": self.pool.stage_tag,
                "flags": self.pool.flags,
                "source_session": self.pool.source_session,
                "candidates": [c.as_dict() for c in self.pool.candidates],
            },
        }

    @classmethod
    def from_dict(cls, obj: dict, ballots: list[Ballot] | None = None) -> "Session":
        from .propose import Candidate

        pool = CandidatePool(
            category=obj["pool"]["category"],
            domain=obj["pool"]["domain"],
            stage_tag=obj["pool"]["stage_tag"],
            candidates=[Candidate.from_dict(c) for c in obj["pool"]["candidates"]],
            flags=list(obj["pool"].get("flags", [])),
            source_session=obj["pool"].get("source_session", ""),
        )
        return cls(
            session_id=obj["session_id"],
            category=obj["category"],
            domain=obj["domain"],
            stage=obj["stage"],
            pool=pool,
            panel=[VoterProfile.from_dict(p) for p in obj["panel"]],
            rule=VotingRule.from_dict(obj["rule"]),
            presentation_order=list(obj["presentation_order"]),
            status=obj.get("status", "open"),
            ballots=list(ballots or []),
        )


def create_session(
    category: str,
    domain: str,
    stage: str,
    pool: CandidatePool,
    panel: list[VoterProfile],
    rule: VotingRule,
    rng_seed: int = 0,
    session_id: str = "",
) -> Session:
    """Open a session with a stored, seeded candidate presentation order."""
    expected_tag = _STAGE_POOL_TAGS.get(stage)
    if expected_tag is None:
        raise ContractViolation(f"unknown stage {stage!r}")
    if pool.stage_tag != expected_tag:
        raise ContractViolation(
            f"{stage} expects a {expected_tag} pool, got {pool.stage_tag}"
        )
    ids = [p.voter_id for p in panel]
    if len(set(ids)) != len(ids):
        raise ContractViolation("panel contains duplicate voter_ids")
    if not session_id:
        session_id = stable_hash("session", category, domain, stage)[:16]
    order = pool.ids()
    rng_for(rng_seed, f"presentation:{session_id}").shuffle(order)
    return Session(
        session_id=session_id,
        category=category,
        domain=domain,
        stage=stage,
        pool=pool,
        panel=list(panel),
        rule=rule,
        presentation_order=order,
    )


def submit_ballot(session: Session, ballot: Ballot) -> SubmitResult:
    """Validate and append one ballot; accepted ballots are immutable."""
    if session.status != "open":
        return SubmitResult(False, REJECT_CLOSED)
    kinds = session.voter_kinds()
    if ballot.voter_id not in kinds:
        return SubmitResult(False, REJECT_UNKNOWN_VOTER)
    if session.has_voted(ballot.voter_id):
        return SubmitResult(False, REJECT_DUPLICATE_VOTER)
    if len(set(ballot.selections)) != len(ballot.selections):
        return SubmitResult(False, REJECT_DUPLICATE_SELECTION)
    if session.rule.kind == "limited_exact":
        if len(ballot.selections) != session.rule.votes_per_voter:
            return SubmitResult(False, REJECT_WRONG_COUNT)
    elif not ballot.selections:
        return SubmitResult(False, REJECT_WRONG_COUNT)
    known = set(session.pool.ids())
    if any(cid not in known for cid in ballot.selections):
        return SubmitResult(False, REJECT_UNKNOWN_CANDIDATE)
    session.ballots.append(ballot)
    return SubmitResult(True)


def close_session(session: Session) -> None:
    session.status = "closed"


@dataclass
class CollectReport:
    accepted: int
    abstentions: list[str] = field(default_factory=list)


def collect_ai_ballots(
    client: AgentClient,
    session: Session,
    voter_endpoint: AgentEndpoint,
    submit=None,
) -> CollectReport:
    """One model call per AI panelist; invalid output retries, then abstains.

    ``submit`` defaults to direct in-memory submission; pass a store-backed
    callable to persist accepted ballots.
    """
    if session.status != "open":
        raise ContractViolation("session is closed")
    if submit is None:
        submit = lambda ballot: submit_ballot(session, ballot)  # noqa: E731
    by_id = session.pool.by_id()
    listing = "\n".join(
        f"{cid}: {by_id[cid].text}" for cid in session.presentation_order
    )
    template, _ = load_template("session_ballot")
    report = CollectReport(accepted=0)
    for profile in session.ai_members():
        problem = ""
        done = False
        for attempt in range(1, BALLOT_ATTEMPTS + 1):
            note = "" if attempt == 1 else f"Attempt {attempt}: previous ballot invalid ({problem})."
            prompt = template.substitute(
                role=profile.role,
                specialization=profile.specialization,
                background=profile.background,
                rule_text=session.rule.text(),
                candidates=listing,
                retry_note=note,
            )
            reply = client.complete(
                voter_endpoint,
                prompt,
                decode_hints={
                    "kind": "session_ballot",
                    "voter_id": profile.voter_id,
                    "rule_kind": session.rule.kind,
                    "votes_per_voter": session.rule.votes_per_voter,
                    "candidate_ids": session.presentation_order,
                    "attempt": attempt,
                },
            )
            try:
                selections = json.loads(reply)["selections"]
                if not isinstance(selections, list) or not all(
                    isinstance(s, str) for s in selections
                ):
                    raise TypeError("selections is not a list of ids")
            except (ValueError, KeyError, TypeError) as exc:
                problem = f"unparseable: {exc}"
                continue
            result = submit(
                Ballot(
                    voter_id=profile.voter_id,
                    selections=tuple(selections),
                    submitted_at=client.clock(),
                )
            )
            if result.accepted:
                report.accepted += 1
                done = True
                break
            problem = result.reason or "rejected"
        if not done:
            report.abstentions.append(profile.voter_id)
    return report


@dataclass
class TallyRow:
    candidate_id: str
    raw_human: int
    raw_ai: int
    weighted_score: float
    final_rank: int
    advanced: bool
    inducted: bool

    def as_dict(self) -> dict:
        return {
            "candidate_id": self.candidate_id,
            "raw_human": self.raw_human,
            "raw_ai": self.raw_ai,
            "weighted_score": self.weighted_score,
            "final_rank": self.final_rank,
            "advanced": self.advanced,
            "inducted": self.inducted,
        }


@dataclass
class Tally:
    session_id: str
    candidate_order: list[str]  # session presentation order
    rows: list[TallyRow]  # in final_rank order
    turnout: dict[str, int]

    def row(self, candidate_id: str) -> TallyRow:
        for r in self.rows:
            if r.candidate_id == candidate_id:
                return r
        raise KeyError(candidate_id)

    def as_dict(self) -> dict:
        return {
            "session_id": self.session_id,
            "candidate_order": self.candidate_order,
            "rows": [r.as_dict() for r in self.rows],
            "turnout": self.turnout,
        }


def tally(session: Session) -> Tally:
    """Weighted per-candidate counts for a closed session.

    Rank order is (weighted score desc, human votes desc, candidate_id asc);
    the advance/induct flags follow the session rule's counts.
    """
    if session.status != "closed":
        raise ContractViolation("tally requires a closed session")
    if not session.ballots:
        raise EmptyTallyError(f"session {session.session_id} has no ballots")
    kinds = session.voter_kinds()
    human = {cid: 0 for cid in session.pool.ids()}
    ai = {cid: 0 for cid in session.pool.ids()}
    turnout = {"human": 0, "ai": 0}
    for ballot in session.ballots:
        kind = kinds[ballot.voter_id]
        turnout[kind] += 1
        bucket = human if kind == "human" else ai
        for cid in ballot.selections:
            bucket[cid] += 1
    rule = session.rule
    weighted = {
        cid: rule.weight_human * human[cid] + rule.weight_ai * ai[cid]
        for cid in human
    }
    order = sorted(weighted, key=lambda cid: (-weighted[cid], -human[cid], cid))
    rows = [
        TallyRow(
            candidate_id=cid,
            raw_human=human[cid],
            raw_ai=ai[cid],
            weighted_score=weighted[cid],
            final_rank=i + 1,
            advanced=i + 1 <= rule.advance_count,
            inducted=i + 1 <= rule.induct_count,
        )
        for i, cid in enumerate(order)
    ]
    return Tally(
        session_id=session.session_id,
        candidate_order=list(session.presentation_order),
        rows=rows,
        turnout=turnout,
    )


@dataclass
class AdvanceResult:
    pool: CandidatePool
    inducted: CandidatePool | None = None


def advance(session: Session, session_tally: Tally) -> AdvanceResult:
    """Emit the next-stage pool (and the inducted pair after refinement)."""
    by_id = session.pool.by_id()
    advanced = [
        by_id[r.candidate_id] for r in session_tally.rows if r.advanced
    ]
    if session.stage == "screening":
        pool = CandidatePool(
            category=session.category,
            domain=session.domain,
            stage_tag="short30",
            candidates=advanced,
            source_session=session.session_id,
        )
        return AdvanceResult(pool=pool)
    inducted = [by_id[r.candidate_id] for r in session_tally.rows if r.inducted]
    final = CandidatePool(
        category=session.category,
        domain=session.domain,
        stage_tag="final10",
        candidates=advanced,
        source_session=session.session_id,
    )
    top_two = CandidatePool(
        category=session.category,
        domain=session.domain,
        stage_tag="inducted2",
        candidates=inducted,
        source_session=session.session_id,
    )
    return AdvanceResult(pool=final, inducted=top_two)


class SessionStore:
    """Session registry with an append-only on-disk ballot log per session.

    Submissions are serialized through a per-session lock, so concurrent
    voters cannot lose or double-count ballots. Reads of closed sessions
    need no locking.
    """

    def __init__(self, directory: Path | str | None = None):
        self.directory = Path(directory) if directory else None
        self._sessions: dict[str, Session] = {}
        self._locks: dict[str, threading.Lock] = {}
        self._registry_lock = threading.Lock()

    def _session_dir(self, session_id: str) -> Path:
        assert self.directory is not None
        return self.directory / session_id

    def add(self, session: Session) -> None:
        with self._registry_lock:
            if session.session_id in self._sessions:
                raise ContractViolation(f"duplicate session {session.session_id}")
            self._sessions[session.session_id] = session
            self._locks[session.session_id] = threading.Lock()
        self._persist_meta(session)
        if self.directory and session.ballots:
            for ballot in session.ballots:
                self._append_ballot(session.session_id, ballot)

    def _persist_meta(self, session: Session) -> None:
        if not self.directory:
            return
        sdir = self._session_dir(session.session_id)
        sdir.mkdir(parents=True, exist_ok=True)
        with open(sdir / "session.json", "w", encoding="utf-8") as f:
            json.dump(session.as_dict(), f, sort_keys=True, ensure_ascii=False)
            f.write("\n")

    def _append_ballot(self, session_id: str, ballot: Ballot) -> None:
        if not self.directory:
            return
        with open(
            self._session_dir(session_id) / "ballots.jsonl", "a", encoding="utf-8"
        ) as f:
            f.write(json.dumps(ballot.as_dict(), sort_keys=True) + "\n")

    def get(self, session_id: str) -> Session:
        try:
            return self._sessions[session_id]
        except KeyError:
            raise KeyError(f"unknown session {session_id}") from None

    def session_ids(self) -> list[str]:
        return sorted(self._sessions)

    def submit(self, session_id: str, ballot: Ballot) -> SubmitResult:
        session = self.get(session_id)
        with self._locks[session_id]:
            result = submit_ballot(session, ballot)
            if result.accepted:
                self._append_ballot(session_id, ballot)
        return result

    def close(self, session_id: str) -> None:
        session = self.get(session_id)
        with self._locks[session_id]:
            close_session(session)
            self._persist_meta(session)

    @classmethod
    def load(cls, directory: Path | str) -> "SessionStore":
        store = cls(directory)
        root = Path(directory)
        for meta_path in sorted(root.glob("*/session.json")):
            with open(meta_path, "r", encoding="utf-8") as f:
                obj = json.load(f)
            if obj.get("format") != SESSION_FORMAT_TAG:
                raise ContractViolation(f"unsupported session format in {meta_path}")
            ballots = load_ballot_log(meta_path.parent / "ballots.jsonl")
            session = Session.from_dict(obj, ballots)
            store._sessions[session.session_id] = session
            store._locks[session.session_id] = threading.Lock()
        return store


def load_ballot_log(path: Path | str) -> list[Ballot]:
    path = Path(path)
    if not path.exists():
        return []
    with open(path, "r", encoding="utf-8") as f:
        return [Ballot.from_dict(json.loads(line)) for line in f if line.strip()]


def replay_tally(session_meta: dict, ballots: list[Ballot]) -> Tally:
    """Recompute a tally from archived session metadata plus its ballot log."""
    session = Session.from_dict(session_meta)
    session.status = "open"  # archive may record the closed state
    session.ballots = []
    for ballot in ballots:
        result = submit_ballot(session, ballot)
        if not result.accepted:
            raise ContractViolation(
                f"archived ballot from {ballot.voter_id} rejected on replay: "
                f"{result.reason}"
            )
    close_session(session)
    return tally(session)
