"""Hotness-priority greedy clustering and rule-based keyword selection.

Keywords are visited hottest first. Each joins the first cluster whose seed
lies strictly within the distance threshold; failing that it seeds a new
cluster if its rank clears the top-fraction cutoff, and is left unassigned
otherwise. Seeds therefore sit pairwise at least the threshold apart, and
every cluster's seed is its hottest member.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .embedding import EmbeddingTable
from .errors import ContractViolation
from .hotness import HotnessTable, bandwidth_from_percentile, normalized_matrix


@dataclass(frozen=True)
class SelectionThresholds:
    sigma_perc_2: float = 0.0005
    kw_hotness_threshold: float = 0.05
    kw_breakthrough_threshold: int = 50
    cluster_hotness_threshold: int = 5
    kw_question_threshold: int = 5
    within_pool_ranks: bool = True

    def __post_init__(self):
        if not 0.0 < self.sigma_perc_2 < 1.0:
            raise ContractViolation("sigma_perc_2 must lie in (0, 1)")
        if not 0.0 < self.kw_hotness_threshold < 1.0:
            raise ContractViolation("kw_hotness_threshold must lie in (0, 1)")
        for name in (
            "kw_breakthrough_threshold",
            "cluster_hotness_threshold",
            "kw_question_threshold",
        ):
            if getattr(self, name) < 1:
                raise ContractViolation(f"{name} must be >= 1")


@dataclass
class Cluster:
    seed: str
    members: list[str]  # assignment order; seed is members[0]


@dataclass
class ClusterSet:
    domain: str
    year: int
    distance_threshold: float
    clusters: list[Cluster]
    unassigned: list[str]

    def export_csv(self, path, rank: dict[str, int] | None = None) -> None:
        with open(path, "w", encoding="utf-8", newline="") as f:
            f.write("cluster_index,seed,member,member_rank\n")
            for idx, cluster in enumerate(self.clusters, start=1):
                for member in cluster.members:
                    r = "" if rank is None else rank.get(member, "")
                    f.write(f'{idx},"{cluster.seed}","{member}",{r}\n')


@dataclass
class QuestionKeywords:
    set_1: tuple[str, ...]
    set_2: tuple[str, ...]
    no_eligible_clusters: bool = False


@dataclass
class KeywordSelections:
    domain: str
    breakthrough_keywords: tuple[str, ...]
    question_keywords_1: tuple[str, ...]
    question_keywords_2: tuple[str, ...]
    no_eligible_clusters: bool = False

    def export_csv(self, path) -> None:
        sets = [
            ("breakthrough_keywords", self.breakthrough_keywords),
            ("question_keywords_1", self.question_keywords_1),
            ("question_keywords_2", self.question_keywords_2),
        ]
        with open(path, "w", encoding="utf-8", newline="") as f:
            f.write("set_name,keyword\n")
            for name, kws in sets:
                for kw in kws:
                    f.write(f'{name},"{kw}"\n')


def cluster_by_hotness_priority(
    hotness: HotnessTable,
    emb: EmbeddingTable,
    thr: SelectionThresholds,
    distance_sample: np.ndarray,
) -> ClusterSet:
    """Greedy first-fit clustering in descending hotness order.

    The distance threshold is the sigma_perc_2 order statistic of the given
    distance sample. Only embedded keywords are clustered; keywords without a
    vector cannot be placed and are reported as unassigned.
    """
    threshold = bandwidth_from_percentile(distance_sample, thr.sigma_perc_2)
    kws, unit = normalized_matrix(emb)
    missing = [k for k in kws if k not in hotness.rank]
    if missing:
        raise ContractViolation(f"embedded keyword {missing[0]!r} has no rank")
    row = {k: i for i, k in enumerate(kws)}

    n_keywords = len(hotness.rank)
    max_seed_rank = math.ceil(thr.kw_hotness_threshold * n_keywords)

    clusters: list[Cluster] = []
    seed_rows: list[int] = []
    unassigned: list[str] = []
    for kw in sorted(kws, key=lambda k: hotness.rank[k]):
        vec = unit[row[kw]]
        placed = False
        for cluster, seed_row in zip(clusters, seed_rows):
            dist = min(max(1.0 - float(unit[seed_row] @ vec), 0.0), 2.0)
            if dist < threshold:
                cluster.members.append(kw)
                placed = True
                break
        if placed:
            continue
        if hotness.rank[kw] <= max_seed_rank:
            clusters.append(Cluster(seed=kw, members=[kw]))
            seed_rows.append(row[kw])
        else:
            unassigned.append(kw)
    unassigned.extend(sorted(set(hotness.rank) - set(kws)))
    return ClusterSet(
        domain=hotness.domain,
        year=hotness.year,
        distance_threshold=threshold,
        clusters=clusters,
        unassigned=unassigned,
    )


def select_breakthrough_keywords(
    rank_prev: dict[str, int],
    rank_curr: dict[str, int],
    thr: SelectionThresholds,
) -> tuple[str, ...]:
    """Keywords prominent last year (rank within the cutoff) that rose this year.

    A rank that merely holds does not count as rising; keywords missing from
    either year are excluded.
    """
    chosen = [
        k
        for k, prev in rank_prev.items()
        if prev <= thr.kw_breakthrough_threshold
        and k in rank_curr
        and rank_curr[k] < prev
    ]
    return tuple(sorted(chosen))


def _top_by(pool: list[str], key, limit: int) -> tuple[str, ...]:
    ordered = sorted(pool, key=key)
    return tuple(sorted(ordered[:limit]))


def select_question_keywords(
    clusters: ClusterSet,
    rank_curr: dict[str, int],
    rank_delta: dict[str, int],
    thr: SelectionThresholds,
) -> QuestionKeywords:
    """Two keyword sets drawn from members of the top clusters.

    Eligible clusters are those whose seed's hotness rank clears
    cluster_hotness_threshold. Set 1 takes the highest-ranked pool members;
    set 2 the biggest rank climbers (missing deltas count as 0). Both cut at
    kw_question_threshold, by rank recomputed within the pool by default or
    by the global rank when within_pool_ranks is off.
    """
    eligible = [
        c
        for c in clusters.clusters
        if rank_curr.get(c.seed, math.inf) <= thr.cluster_hotness_threshold
    ]
    if not eligible:
        return QuestionKeywords(set_1=(), set_2=(), no_eligible_clusters=True)
    pool = [m for c in eligible for m in c.members]
    limit = thr.kw_question_threshold

    if thr.within_pool_ranks:
        set_1 = _top_by(pool, lambda k: (rank_curr[k], k), limit)
        set_2 = _top_by(pool, lambda k: (-rank_delta.get(k, 0), k), limit)
    else:
        set_1 = tuple(sorted(k for k in pool if rank_curr[k] <= limit))
        delta_order = sorted(rank_delta, key=lambda k: (-rank_delta[k], k))
        delta_rank = {k: i + 1 for i, k in enumerate(delta_order)}
        set_2 = tuple(
            sorted(k for k in pool if delta_rank.get(k, math.inf) <= limit)
        )

    return QuestionKeywords(set_1=set_1, set_2=set_2)


def make_selections(
    domain: str,
    breakthrough: tuple[str, ...],
    questions: QuestionKeywords,
) -> KeywordSelections:
    return KeywordSelections(
        domain=domain,
        breakthrough_keywords=breakthrough,
        question_keywords_1=questions.set_1,
        question_keywords_2=questions.set_2,
        no_eligible_clusters=questions.no_eligible_clusters,
    )
