"""Deterministic synthetic responder for mock endpoints.

Unregistered mock prompts can be answered by this responder: every reply is a
pure function of the endpoint id, the prompt, and the caller's decode hints,
so full pipeline runs in mock mode are reproducible byte for byte. Replies
are well-formed for each request kind (candidate lists, ballots, panels), and
request kinds without a rule here fall back to the mock table's sentinel.
"""

from __future__ import annotations

import json

from .util import stable_hash

# five canned research tracks; backgrounds cycle so the per-background cap
# ceil(count / 5) always holds
_BACKGROUNDS = (
    "computational methods",
    "experimental design",
    "theory and foundations",
    "applied systems",
    "data and measurement",
)


def _hash01(*parts: str) -> float:
    return int(stable_hash(*parts)[:12], 16) / float(1 << 48)


def popularity(candidate_id: str) -> float:
    """Stable per-candidate base appeal in [0.15, 0.85]."""
    return 0.15 + 0.7 * _hash01("pop", candidate_id)


def synth_selections(
    voter_id: str,
    candidate_ids: list[str],
    rule_kind: str,
    votes_per_voter: int,
    style: str = "ai",
) -> list[str]:
    """A deterministic ballot for one voter.

    Selections blend shared candidate appeal with voter-specific noise;
    the human style weights shared appeal more than the ai style, so the
    two populations produce close but distinct vote distributions.
    """
    consensus = 0.8 if style == "human" else 0.5
    scores = {
        cid: consensus * popularity(cid)
        + (1.0 - consensus) * _hash01("taste", style, voter_id, cid)
        for cid in candidate_ids
    }
    if rule_kind == "limited_exact":
        ranked = sorted(candidate_ids, key=lambda c: (-scores[c], c))
        return ranked[: min(votes_per_voter, len(candidate_ids))]
    approved = [cid for cid in candidate_ids if scores[cid] > 0.45]
    if not approved:
        approved = [max(candidate_ids, key=lambda c: (scores[c], c))]
    return approved


def respond(endpoint_id: str, prompt: str, hints: dict | None) -> str | None:
    """Synthesize a valid response for a hinted request, or None to decline."""
    if not hints:
        return None
    kind = hints.get("kind")
    h = stable_hash(endpoint_id, prompt)[:10]

    if kind == "deep_research":
        mode = hints.get("mode", "")
        return (
            f"Research digest {h} ({mode}, via {endpoint_id}).\n"
            f"1. Development thread {h[:4]}: sustained attention across venues.\n"
            f"2. Development thread {h[4:8]}: rapid uptake in applied settings.\n"
        )

    if kind == "consolidate":
        return (
            f"Consolidated digest {h} (via {endpoint_id}).\n"
            "Merged overlapping threads and kept all distinct items.\n"
        )

    if kind == "candidates":
        count = int(hints["count"])
        keyword = hints.get("keyword", "topic")
        category = hints.get("category", "breakthrough")
        stem = "Advance" if category == "breakthrough" else "Open question"
        texts = []
        for i in range(count):
            # every fifth slot drops the endpoint salt, so different models
            # occasionally propose identical wording and exercise dedup
            shared = _hash01("share", keyword, str(i)) < 0.2
            salt = "" if shared else endpoint_id
            tag = stable_hash("cand", salt, keyword, category, str(i))[:8]
            texts.append(f"{stem} {tag} concerning {keyword}")
        return json.dumps({"candidates": texts})

    if kind == "cross_ballot":
        ids = list(hints["candidate_ids"])
        votes = min(int(hints["votes"]), len(ids))
        ranked = sorted(
            ids, key=lambda cid: (-popularity(cid) * _hash01("xvote", endpoint_id, cid), cid)
        )
        return json.dumps({"approve": ranked[:votes]})

    if kind == "panel":
        count = int(hints["count"])
        level = hints.get("level", "graduate")
        profiles = [
            {
                "role": f"{level} panelist",
                "specialization": f"{level} focus area {i + 1:03d}",
                "background": _BACKGROUNDS[i % len(_BACKGROUNDS)],
            }
            for i in range(count)
        ]
        return json.dumps({"profiles": profiles})

    if kind == "session_ballot":
        selections = synth_selections(
            voter_id=hints["voter_id"],
            candidate_ids=list(hints["candidate_ids"]),
            rule_kind=hints["rule_kind"],
            votes_per_voter=int(hints.get("votes_per_voter", 0)),
            style="ai",
        )
        return json.dumps({"selections": selections})

    return None
