"""Candidate generation from keyword-grounded prompts and 600-to-100 consolidation.

Each proposal endpoint is prompted once per seed keyword and its replies are
parsed into candidates, deduplicated by a hash of the normalized text. The
combined pool is then put to a cross-model approval vote: every endpoint sees
the full pool in its own seeded shuffle and approves a fixed number of
candidates; the top aggregate vote-getters form the next-stage pool.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .agents import AgentClient, AgentEndpoint, ContextDocument, load_template
from .corpus import WorkRecord
from .errors import ContractViolation, EnsembleFailure
from .util import candidate_id, rng_for

CATEGORIES = ("breakthrough", "question")
STAGE_TAGS = ("raw600", "pool100", "short30", "final10", "inducted2")
EXPECTED_SIZES = {"pool100": 100, "short30": 30, "final10": 10, "inducted2": 2}
POOL_FORMAT_TAG = "trendvote-pool/1"
NO_LITERATURE_MARKER = "[no literature found]"
VOTE_ATTEMPTS = 3


@dataclass(frozen=True)
class Candidate:
    candidate_id: str
    text: str
    category: str
    domain: str
    source_model: str
    seed_keywords: tuple[str, ...] = ()
    cited_work_ids: tuple[str, ...] = ()

    def __post_init__(self):
        if not self.text.strip():
            raise ContractViolation("candidate text must be non-empty")
        if self.category not in CATEGORIES:
            raise ContractViolation(f"unknown category {self.category!r}")

    @classmethod
    def make(
        cls,
        text: str,
        category: str,
        domain: str,
        source_model: str,
        seed_keywords: tuple[str, ...] = (),
        cited_work_ids: tuple[str, ...] = (),
    ) -> "Candidate":
        return cls(
            candidate_id=candidate_id(text),
            text=text,
            category=category,
            domain=domain,
            source_model=source_model,
            seed_keywords=seed_keywords,
            cited_work_ids=cited_work_ids,
        )

    def as_dict(self) -> dict:
        return {
            "candidate_id": self.candidate_id,
            "text": self.text,
            "category": self.category,
            "domain": self.domain,
            "source_model": self.source_model,
            "seed_keywords": list(self.seed_keywords),
            "cited_work_ids": list(self.cited_work_ids),
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "Candidate":
        return cls(
            candidate_id=obj["candidate_id"],
            text=obj["text"],
            category=obj["category"],
            domain=obj["domain"],
            source_model=obj["source_model"],
            seed_keywords=tuple(obj.get("seed_keywords", ())),
            cited_work_ids=tuple(obj.get("cited_work_ids", ())),
        )


@dataclass
class CandidatePool:
    category: str
    domain: str
    stage_tag: str
    candidates: list[Candidate]
    flags: list[str] = field(default_factory=list)
    source_session: str = ""

    def __post_init__(self):
        if self.stage_tag not in STAGE_TAGS:
            raise ContractViolation(f"unknown stage tag {self.stage_tag!r}")
        expected = EXPECTED_SIZES.get(self.stage_tag)
        if expected is not None:
            if len(self.candidates) > expected:
                raise ContractViolation(
                    f"{self.stage_tag} pool has {len(self.candidates)} candidates"
                )
            if len(self.candidates) < expected and "short_pool" not in self.flags:
                self.flags.append("short_pool")
        ids = [c.candidate_id for c in self.candidates]
        if len(set(ids)) != len(ids):
            raise ContractViolation("pool contains duplicate candidate ids")

    def ids(self) -> list[str]:
        return [c.candidate_id for c in self.candidates]

    def by_id(self) -> dict[str, Candidate]:
        return {c.candidate_id: c for c in self.candidates}

    def save(self, path: Path | str) -> None:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8") as f:
            header = {
                "format": POOL_FORMAT_TAG,
                "category": self.category,
                "domain": self.domain,
                "stage_tag": self.stage_tag,
                "flags": self.flags,
                "source_session": self.source_session,
            }
            f.write(json.dumps(header, sort_keys=True, ensure_ascii=False) + "\n")
            for cand in self.candidates:
                f.write(
                    json.dumps(cand.as_dict(), sort_keys=True, ensure_ascii=False)
                    + "\n"
                )

    @classmethod
    def load(cls, path: Path | str) -> "CandidatePool":
        with open(path, "r", encoding="utf-8") as f:
            header = json.loads(f.readline())
            if header.get("format") != POOL_FORMAT_TAG:
                raise ContractViolation(f"unsupported pool format in {path}")
            candidates = [Candidate.from_dict(json.loads(line)) for line in f]
        return cls(
            category=header["category"],
            domain=header["domain"],
            stage_tag=header["stage_tag"],
            candidates=candidates,
            flags=list(header.get("flags", [])),
            source_session=header.get("source_session", ""),
        )


@dataclass(frozen=True)
class PromptBundle:
    """One assembled prompt plus the provenance that generated candidates inherit."""

    text: str
    template_hash: str
    keyword: str
    category: str
    domain: str
    count: int
    cited_work_ids: tuple[str, ...]


def _format_literature(works: list[WorkRecord]) -> str:
    if not works:
        return NO_LITERATURE_MARKER
    return "\n".join(
        f"- {w.title} ({w.cited_by_count} citations)" for w in works
    )


def assemble_breakthrough_prompt(
    keyword: str,
    works: list[WorkRecord],
    context: ContextDocument,
    domain: str,
    year: int,
    count: int,
) -> PromptBundle:
    template, template_hash = load_template("propose_breakthrough")
    text = template.substitute(
        domain=domain,
        year=year,
        keyword=keyword,
        literature=_format_literature(works),
        context=context.text,
        count=count,
    )
    return PromptBundle(
        text=text,
        template_hash=template_hash,
        keyword=keyword,
        category="breakthrough",
        domain=domain,
        count=count,
        cited_work_ids=tuple(w.work_id for w in works),
    )


def assemble_question_prompt(
    keyword: str,
    works_recent: list[WorkRecord],
    works_foundational: list[WorkRecord],
    context: ContextDocument,
    domain: str,
    year: int,
    count: int,
) -> PromptBundle:
    template, template_hash = load_template("propose_question")
    text = template.substitute(
        domain=domain,
        year=year,
        keyword=keyword,
        literature_recent=_format_literature(works_recent),
        literature_foundational=_format_literature(works_foundational),
        context=context.text,
        count=count,
    )
    cited = tuple(w.work_id for w in works_recent) + tuple(
        w.work_id for w in works_foundational
    )
    return PromptBundle(
        text=text,
        template_hash=template_hash,
        keyword=keyword,
        category="question",
        domain=domain,
        count=count,
        cited_work_ids=cited,
    )


@dataclass
class ProposeReport:
    candidates: list[Candidate]
    shortfall: bool = False
    warnings: list[str] = field(default_factory=list)


def propose_candidates(
    client: AgentClient,
    endpoint: AgentEndpoint,
    prompts: list[PromptBundle],
    target_count: int = 100,
) -> ProposeReport:
    """Run prompts through one endpoint until target_count distinct candidates.

    Unparseable replies are skipped and reported; falling short of the target
    after all prompts is flagged rather than fatal.
    """
    if not prompts:
        raise ContractViolation("need at least one prompt")
    found: dict[str, Candidate] = {}
    warnings: list[str] = []
    for bundle in prompts:
        if len(found) >= target_count:
            break
        reply = client.complete(
            endpoint,
            bundle.text,
            decode_hints={
                "kind": "candidates",
                "count": bundle.count,
                "keyword": bundle.keyword,
                "category": bundle.category,
                "domain": bundle.domain,
            },
        )
        try:
            texts = json.loads(reply)["candidates"]
            if not isinstance(texts, list):
                raise TypeError("candidates is not a list")
        except (ValueError, KeyError, TypeError) as exc:
            warnings.append(f"{endpoint.endpoint_id}/{bundle.keyword}: {exc}")
            continue
        for text in texts:
            if not isinstance(text, str) or not text.strip():
                continue
            cand = Candidate.make(
                text=text.strip(),
                category=bundle.category,
                domain=bundle.domain,
                source_model=endpoint.endpoint_id,
                seed_keywords=(bundle.keyword,),
                cited_work_ids=bundle.cited_work_ids,
            )
            if cand.candidate_id not in found and len(found) < target_count:
                found[cand.candidate_id] = cand
    return ProposeReport(
        candidates=list(found.values()),
        shortfall=len(found) < target_count,
        warnings=warnings,
    )


def merge_pools(reports: list[ProposeReport], category: str, domain: str) -> CandidatePool:
    """Union the per-model candidate lists, deduplicated by candidate_id."""
    merged: dict[str, Candidate] = {}
    for report in reports:
        for cand in report.candidates:
            merged.setdefault(cand.candidate_id, cand)
    return CandidatePool(
        category=category,
        domain=domain,
        stage_tag="raw600",
        candidates=list(merged.values()),
    )


@dataclass
class VoteReport:
    tally: dict[str, int]
    valid_ballots: int
    votes_per_ballot: int
    dropped: list[str] = field(default_factory=list)
    ballots: dict[str, list[str]] = field(default_factory=dict)


def cross_model_vote(
    client: AgentClient,
    pool: CandidatePool,
    endpoints: list[AgentEndpoint],
    votes_per_model: int = 100,
    rng_seed: int = 0,
) -> VoteReport:
    """Each endpoint approves votes_per_model candidates from the full pool.

    Every endpoint sees the pool in its own seeded shuffle to dilute position
    bias. A ballot with the wrong count, unknown ids, or duplicates is
    re-requested up to VOTE_ATTEMPTS times, then that model is dropped.
    """
    ids = pool.ids()
    if not ids:
        raise ContractViolation("cannot vote on an empty pool")
    by_id = pool.by_id()
    votes_needed = min(votes_per_model, len(ids))
    template, _ = load_template("cross_model_ballot")

    tally = {cid: 0 for cid in ids}
    ballots: dict[str, list[str]] = {}
    dropped: list[str] = []
    for endpoint in endpoints:
        shuffled = list(ids)
        rng_for(rng_seed, f"pool-shuffle:{endpoint.endpoint_id}").shuffle(shuffled)
        listing = "\n".join(f"{cid}: {by_id[cid].text}" for cid in shuffled)
        accepted: list[str] | None = None
        problem = ""
        for attempt in range(1, VOTE_ATTEMPTS + 1):
            note = "" if attempt == 1 else f"Attempt {attempt}: previous ballot invalid ({problem})."
            prompt = template.substitute(
                pool_size=len(ids),
                category=pool.category,
                domain=pool.domain,
                candidates=listing,
                votes=votes_needed,
                retry_note=note,
            )
            reply = client.complete(
                endpoint,
                prompt,
                decode_hints={
                    "kind": "cross_ballot",
                    "candidate_ids": shuffled,
                    "votes": votes_needed,
                    "attempt": attempt,
                },
            )
            try:
                approve = json.loads(reply)["approve"]
                if not isinstance(approve, list):
                    raise TypeError("approve is not a list")
            except (ValueError, KeyError, TypeError) as exc:
                problem = f"unparseable: {exc}"
                continue
            if len(approve) != votes_needed:
                problem = f"expected {votes_needed} votes, got {len(approve)}"
                continue
            if len(set(approve)) != len(approve):
                problem = "duplicate ids"
                continue
            unknown = [cid for cid in approve if cid not in tally]
            if unknown:
                problem = f"unknown id {unknown[0]}"
                continue
            accepted = approve
            break
        if accepted is None:
            dropped.append(endpoint.endpoint_id)
            continue
        ballots[endpoint.endpoint_id] = accepted
        for cid in accepted:
            tally[cid] += 1
    if not ballots:
        raise EnsembleFailure("every model ballot was dropped")
    return VoteReport(
        tally=tally,
        valid_ballots=len(ballots),
        votes_per_ballot=votes_needed,
        dropped=dropped,
        ballots=ballots,
    )


def select_top_pool(
    pool: CandidatePool, tally: dict[str, int], k: int = 100
) -> CandidatePool:
    """Top k candidates by (votes desc, candidate_id asc)."""
    if not tally:
        raise ContractViolation("empty tally")
    by_id = pool.by_id()
    order = sorted(tally, key=lambda cid: (-tally[cid], cid))
    chosen = order[:k]
    flags = []
    if k < len(order) and tally[order[k - 1]] == tally[order[k]]:
        flags.append("boundary_tie")
    if k >= len(order):
        flags.append("short_pool")
    return CandidatePool(
        category=pool.category,
        domain=pool.domain,
        stage_tag="pool100",
        candidates=[by_id[cid] for cid in chosen],
        flags=flags,
    )
