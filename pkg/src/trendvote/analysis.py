"""Human vs AI vote distribution comparison via Jensen-Shannon distance."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .ballot import Session, Tally
from .ballot import tally as compute_tally
from .errors import (
    ContractViolation,
    EmptyTallyError,
    UndefinedDistributionError,
)
from .util import dump_json


@dataclass
class VoteDistribution:
    candidate_order: list[str]
    probabilities: np.ndarray
    source_kind: str  # human | ai

    def __post_init__(self):
        if len(self.probabilities) != len(self.candidate_order):
            raise ContractViolation("probability vector length mismatch")
        if np.any(self.probabilities < 0):
            raise ContractViolation("negative probability")
        if abs(float(self.probabilities.sum()) - 1.0) > 1e-12:
            raise ContractViolation("probabilities must sum to 1")


def vote_distribution(session_tally: Tally, kind: str) -> VoteDistribution:
    """Normalized per-candidate vote shares of one voter kind, in session order."""
    if kind not in ("human", "ai"):
        raise ContractViolation(f"unknown voter kind {kind!r}")
    by_id = {r.candidate_id: r for r in session_tally.rows}
    raw = np.array(
        [
            by_id[cid].raw_human if kind == "human" else by_id[cid].raw_ai
            for cid in session_tally.candidate_order
        ],
        dtype=float,
    )
    total = raw.sum()
    if total == 0:
        raise UndefinedDistributionError(f"no {kind} votes in this tally")
    return VoteDistribution(
        candidate_order=list(session_tally.candidate_order),
        probabilities=raw / total,
        source_kind=kind,
    )


def js_distance(p, q) -> float:
    """Jensen-Shannon distance with base-2 logs: 0 for identical inputs, at most 1.

    Computed as sqrt(JSD) with JSD = (KL(P||M) + KL(Q||M)) / 2, M the midpoint,
    and 0 * log 0 taken as 0. Term pairs are combined per index before summing
    so the result is exactly symmetric in its arguments.
    """
    if isinstance(p, VoteDistribution):
        p = p.probabilities
    if isinstance(q, VoteDistribution):
        q = q.probabilities
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if p.shape != q.shape:
        raise ContractViolation("distributions have different lengths")
    divergence = 0.0
    for pi, qi in zip(p, q):
        m = 0.5 * (pi + qi)
        if m <= 0.0:
            continue  # both masses zero (or the midpoint underflowed)
        term_p = pi * math.log2(pi / m) if pi > 0.0 else 0.0
        term_q = qi * math.log2(qi / m) if qi > 0.0 else 0.0
        divergence += term_p + term_q
    divergence = min(max(0.5 * divergence, 0.0), 1.0)
    return math.sqrt(divergence)


@dataclass
class AlignmentRow:
    category: str
    phase: str
    js_distance: float | None
    available: bool
    candidate_count: int
    note: str = ""

    def as_dict(self) -> dict:
        return {
            "category": self.category,
            "phase": self.phase,
            "js_distance": self.js_distance,
            "available": self.available,
            "candidate_count": self.candidate_count,
            "note": self.note,
        }


_PHASE_NAMES = {"screening": "stage1", "refinement": "stage2"}


def alignment_report(sessions: list[Session]) -> list[AlignmentRow]:
    """One row per closed session: the human/AI distribution distance.

    The distributions cover the session's full candidate set. A session where
    either voter kind cast no votes yields an unavailable row instead of an
    error.
    """
    rows = []
    for session in sorted(
        sessions, key=lambda s: (s.category, _PHASE_NAMES.get(s.stage, s.stage))
    ):
        phase = _PHASE_NAMES.get(session.stage, session.stage)
        count = len(session.pool.candidates)
        try:
            session_tally = compute_tally(session)
            human = vote_distribution(session_tally, "human")
            ai = vote_distribution(session_tally, "ai")
        except (EmptyTallyError, UndefinedDistributionError) as exc:
            rows.append(
                AlignmentRow(
                    category=session.category,
                    phase=phase,
                    js_distance=None,
                    available=False,
                    candidate_count=count,
                    note=str(exc),
                )
            )
            continue
        rows.append(
            AlignmentRow(
                category=session.category,
                phase=phase,
                js_distance=js_distance(human, ai),
                available=True,
                candidate_count=count,
            )
        )
    return rows


def write_alignment_report(
    rows: list[AlignmentRow], csv_path: Path | str, json_path: Path | str
) -> None:
    with open(csv_path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["category", "phase", "js_distance"])
        for row in rows:
            value = "" if row.js_distance is None else repr(row.js_distance)
            writer.writerow([row.category, row.phase, value])
    dump_json(
        {
            "rows": [r.as_dict() for r in rows],
            "meta": {
                "distribution_scope": "full candidate set of each stage",
                "log_base": 2,
            },
        },
        Path(json_path),
    )
