"""Kernel-weighted keyword hotness scores and annual ranks.

A keyword's hotness is the sum of every other embedded keyword's appearance
frequency, weighted by a Gaussian kernel over their cosine distance. The
kernel bandwidth is a low order statistic of a large sample of pairwise
distances, so it adapts to each year's distance distribution.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .embedding import EmbeddingTable
from .errors import (
    ContractViolation,
    DefinednessError,
    DegenerateBandwidthError,
)

_CHUNK = 1 << 16


@dataclass(frozen=True)
class HotnessParams:
    sigma_perc_1: float = 0.0005
    sample_size: int = 1_000_000
    rng_seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.sigma_perc_1 < 1.0:
            raise ContractViolation("sigma_perc_1 must lie in (0, 1)")
        if self.sample_size < 1_000:
            raise ContractViolation("sample_size must be >= 1000")


@dataclass
class HotnessTable:
    """Scores plus a total rank order (1 = hottest) for one (domain, year)."""

    domain: str
    year: int
    score: dict[str, float]
    rank: dict[str, int]

    def keywords_by_rank(self) -> list[str]:
        return sorted(self.rank, key=self.rank.get)

    def export_csv(self, path, freq: dict[str, int] | None = None) -> None:
        with open(path, "w", encoding="utf-8", newline="") as f:
            f.write("keyword,score,rank,freq\n")
            for kw in self.keywords_by_rank():
                n = "" if freq is None else freq.get(kw, "")
                f.write(f'"{kw}",{self.score[kw]!r},{self.rank[kw]},{n}\n')


def normalized_matrix(table: EmbeddingTable) -> tuple[list[str], np.ndarray]:
    """Unit-normalized vectors in sorted-keyword order.

    Raises DefinednessError naming the keyword if any vector has zero norm.
    """
    kws, mat = table.matrix()
    norms = np.linalg.norm(mat, axis=1)
    bad = np.nonzero(norms == 0.0)[0]
    if bad.size:
        raise DefinednessError(
            f"zero-norm vector for keyword {kws[int(bad[0])]!r}: "
            "cosine distance undefined"
        )
    return kws, mat / norms[:, None]


def cosine_distance(u: np.ndarray, v: np.ndarray) -> float:
    nu, nv = np.linalg.norm(u), np.linalg.norm(v)
    if nu == 0.0 or nv == 0.0:
        raise DefinednessError("cosine distance undefined for zero-norm vector")
    return float(np.clip(1.0 - (u @ v) / (nu * nv), 0.0, 2.0))


def sample_pairwise_distances(
    table: EmbeddingTable, params: HotnessParams
) -> np.ndarray:
    """Cosine distances of sample_size unordered pairs, ascending.

    Pairs are drawn uniformly with replacement from all unordered pairs of
    distinct keywords; the draw is seeded and repeatable.
    """
    kws, unit = normalized_matrix(table)
    n = len(kws)
    if n < 2:
        raise ContractViolation("need at least 2 vectors to sample distances")
    rng = np.random.default_rng(params.rng_seed)
    i = rng.integers(0, n, size=params.sample_size)
    j = rng.integers(0, n, size=params.sample_size)
    clash = i == j
    while clash.any():
        j[clash] = rng.integers(0, n, size=int(clash.sum()))
        clash = i == j
    dists = np.empty(params.sample_size)
    for lo in range(0, params.sample_size, _CHUNK):
        hi = min(lo + _CHUNK, params.sample_size)
        sims = np.einsum("ij,ij->i", unit[i[lo:hi]], unit[j[lo:hi]])
        dists[lo:hi] = 1.0 - sims
    np.clip(dists, 0.0, 2.0, out=dists)
    dists.sort()
    return dists


def bandwidth_from_percentile(sample: np.ndarray, q: float) -> float:
    """Nearest-rank quantile: the value at 1-indexed rank ceil(q * n)."""
    n = len(sample)
    if n == 0:
        raise ContractViolation("empty distance sample")
    if not 0.0 < q < 1.0:
        raise ContractViolation("quantile fraction must lie in (0, 1)")
    sigma = float(np.sort(sample)[math.ceil(q * n) - 1])
    if sigma == 0.0:
        raise DegenerateBandwidthError(
            "bandwidth is zero: all sampled pairs are identical at this quantile"
        )
    return sigma


def compute_hotness(
    table: EmbeddingTable,
    freq: dict[str, int],
    sigma: float,
    half_factor: bool = True,
) -> HotnessTable:
    """Kernel-weighted frequency sums, ranked descending.

    score(k) = sum over other embedded keywords j of freq(j) * exp(-d(k,j)^2 / (2 sigma^2)).
    Keywords present in freq but not embedded score 0 and rank after all
    embedded keywords. ``half_factor=False`` drops the 1/2 in the exponent
    for sensitivity checks.
    """
    if sigma <= 0.0:
        raise ContractViolation("sigma must be positive")
    kws, unit = normalized_matrix(table)
    missing = [k for k in kws if k not in freq]
    if missing:
        raise ContractViolation(f"no frequency for embedded keyword {missing[0]!r}")

    denom = 2.0 * sigma * sigma if half_factor else sigma * sigma
    scores: dict[str, float] = {}
    if kws:
        dist = np.clip(1.0 - unit @ unit.T, 0.0, 2.0)
        kernel = np.exp(-(dist * dist) / denom)
        np.fill_diagonal(kernel, 0.0)
        counts = np.array([freq[k] for k in kws], dtype=float)
        values = kernel @ counts
        scores = {k: float(v) for k, v in zip(kws, values)}

    isolated = sorted(set(freq) - set(kws))
    for k in isolated:
        scores[k] = 0.0

    order = sorted(kws, key=lambda k: (-scores[k], k)) + isolated
    rank = {k: i + 1 for i, k in enumerate(order)}
    return HotnessTable(
        domain=table.domain, year=table.year, score=scores, rank=rank
    )


def rank_change(prev: HotnessTable, curr: HotnessTable) -> dict[str, int]:
    """prev_rank - curr_rank for keywords ranked in both years; positive = rose."""
    return {
        k: prev.rank[k] - curr.rank[k]
        for k in curr.rank
        if k in prev.rank
    }
