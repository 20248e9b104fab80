"""Biased random walks and skip-gram negative-sampling training.

Walks follow the second-order node2vec transition rule: stepping from ``v``
after arriving from ``t``, a neighbor ``x`` is drawn with weight ``w/p`` if
``x == t``, ``w`` if ``x`` is adjacent to ``t``, and ``w/q`` otherwise. With
``p == q == 1`` this reduces to first-order weight-proportional walks.

Training is plain SGNS: each (center, context) pair within the window is
pushed together while ``num_negatives`` draws from the unigram^0.75 noise
distribution are pushed apart, with a linearly decaying learning rate.
Sequential mode is bit-deterministic for a fixed seed; the lock-free parallel
mode trades that determinism for throughput.
"""

from __future__ import annotations

import math
import struct
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Sequence

import numpy as np

from .cooccur import CoocGraph
from .errors import ContractViolation
from .util import derive_seed

EMBEDDING_MAGIC = b"TVEMB001"


@dataclass(frozen=True)
class TrainConfig:
    embedding_dim: int = 128
    walk_length: int = 20
    num_walks: int = 10
    window_size: int = 3
    p: float = 1.0
    q: float = 1.0
    num_negatives: int = 5
    epochs: int = 25
    learning_rate: float = 0.025
    min_learning_rate: float = 0.0001
    rng_seed: int = 0
    uniform_edge_weights: bool = False
    parallel: bool = False

    def __post_init__(self):
        counts = {
            "embedding_dim": self.embedding_dim,
            "walk_length": self.walk_length,
            "num_walks": self.num_walks,
            "window_size": self.window_size,
            "num_negatives": self.num_negatives,
            "epochs": self.epochs,
        }
        for name, value in counts.items():
            if value < 1:
                raise ContractViolation(f"{name} must be >= 1, got {value}")
        if self.p <= 0 or self.q <= 0:
            raise ContractViolation("p and q must be positive")
        if self.learning_rate <= 0 or self.min_learning_rate <= 0:
            raise ContractViolation("learning rates must be positive")

    def with_seed(self, seed: int) -> "TrainConfig":
        return replace(self, rng_seed=seed)


@dataclass
class EmbeddingTable:
    """Per-(domain, year) keyword vectors; covers the non-isolated graph nodes."""

    domain: str
    year: int
    dim: int
    vectors: dict[str, np.ndarray]
    epoch_losses: tuple[float, ...] | None = field(default=None, compare=False)

    def __post_init__(self):
        for kw, vec in self.vectors.items():
            if vec.shape != (self.dim,):
                raise ContractViolation(f"vector for {kw!r} has shape {vec.shape}")
            if not np.all(np.isfinite(vec)):
                raise ContractViolation(f"non-finite vector for {kw!r}")

    def keywords(self) -> list[str]:
        return sorted(self.vectors)

    def matrix(self) -> tuple[list[str], np.ndarray]:
        """Sorted keywords and the corresponding stacked vector matrix."""
        kws = self.keywords()
        if not kws:
            return kws, np.zeros((0, self.dim))
        return kws, np.stack([self.vectors[k] for k in kws])

    # -- serialization -----------------------------------------------------

    def save(self, path: Path | str) -> None:
        with open(path, "wb") as f:
            f.write(EMBEDDING_MAGIC)
            dom = self.domain.encode("utf-8")
            f.write(struct.pack("<H", len(dom)))
            f.write(dom)
            f.write(struct.pack("<iII", self.year, self.dim, len(self.vectors)))
            for kw in self.keywords():
                kb = kw.encode("utf-8")
                f.write(struct.pack("<H", len(kb)))
                f.write(kb)
                f.write(self.vectors[kw].astype("<f4").tobytes())

    @classmethod
    def load(cls, path: Path | str) -> "EmbeddingTable":
        with open(path, "rb") as f:
            if f.read(8) != EMBEDDING_MAGIC:
                raise ContractViolation(f"not an embedding file: {path}")
            (dom_len,) = struct.unpack("<H", f.read(2))
            domain = f.read(dom_len).decode("utf-8")
            year, dim, count = struct.unpack("<iII", f.read(12))
            vectors: dict[str, np.ndarray] = {}
            for _ in range(count):
                (kw_len,) = struct.unpack("<H", f.read(2))
                kw = f.read(kw_len).decode("utf-8")
                vec = np.frombuffer(f.read(4 * dim), dtype="<f4").astype(np.float64)
                vectors[kw] = vec
        return cls(domain=domain, year=year, dim=dim, vectors=vectors)

    def export_csv(self, path: Path | str) -> None:
        """Plain CSV (keyword, v0..v{dim-1}) for external plotting."""
        with open(path, "w", encoding="utf-8", newline="") as f:
            f.write("keyword," + ",".join(f"v{i}" for i in range(self.dim)) + "\n")
            for kw in self.keywords():
                row = ",".join(repr(float(x)) for x in self.vectors[kw])
                f.write(f'"{kw}",{row}\n')


# -- random walks ------------------------------------------------------------


def _weighted_pick(rng: np.random.Generator, cumweights: np.ndarray) -> int:
    r = rng.random() * cumweights[-1]
    return int(np.searchsorted(cumweights, r, side="right"))


def generate_walks(graph: CoocGraph, cfg: TrainConfig) -> list[list[str]]:
    """num_walks biased walks from every non-isolated node, seeded and repeatable."""
    if not graph.nodes:
        raise ContractViolation("cannot walk an empty graph")
    adj = graph.adjacency()
    starts = [n for n in graph.nodes if adj[n]]
    neighbor_names = {n: [x for x, _ in adj[n]] for n in starts}
    neighbor_sets = {n: frozenset(names) for n, names in neighbor_names.items()}
    if cfg.uniform_edge_weights:
        base_weights = {n: np.ones(len(adj[n])) for n in starts}
    else:
        base_weights = {n: np.array([w for _, w in adj[n]], dtype=float) for n in starts}
    first_cum = {n: np.cumsum(base_weights[n]) for n in starts}

    rng = np.random.default_rng(derive_seed(cfg.rng_seed, "walks"))
    walks: list[list[str]] = []
    order = list(starts)
    for _ in range(cfg.num_walks):
        rng.shuffle(order)
        for start in order:
            walk = [start]
            while len(walk) < cfg.walk_length:
                cur = walk[-1]
                names = neighbor_names.get(cur)
                if not names:
                    break
                if len(walk) == 1 or (cfg.p == 1.0 and cfg.q == 1.0):
                    idx = _weighted_pick(rng, first_cum[cur])
                else:
                    prev = walk[-2]
                    prev_nbrs = neighbor_sets[prev]
                    weights = base_weights[cur].copy()
                    for i, x in enumerate(names):
                        if x == prev:
                            weights[i] /= cfg.p
                        elif x not in prev_nbrs:
                            weights[i] /= cfg.q
                    idx = _weighted_pick(rng, np.cumsum(weights))
                walk.append(names[idx])
            walks.append(walk)
    return walks


# -- skip-gram with negative sampling ----------------------------------------


def _sigmoid(x):
    # tanh form is stable for large |x|
    return 0.5 * (1.0 + np.tanh(0.5 * x))


def _log_sigmoid(x):
    return -np.logaddexp(0.0, -x)


def pair_loss(v_c: np.ndarray, u_o: np.ndarray, u_negs: np.ndarray) -> float:
    """SGNS loss for one (center, context, negatives) triple."""
    pos = _log_sigmoid(float(u_o @ v_c))
    neg = _log_sigmoid(-(u_negs @ v_c)).sum()
    return -(pos + neg)


def pair_gradients(
    v_c: np.ndarray, u_o: np.ndarray, u_negs: np.ndarray
) -> tuple[float, np.ndarray, np.ndarray, np.ndarray]:
    """Loss and analytical gradients wrt (v_c, u_o, u_negs) for one triple."""
    s_pos = float(u_o @ v_c)
    s_neg = u_negs @ v_c
    g_pos = _sigmoid(s_pos) - 1.0
    g_neg = _sigmoid(s_neg)
    loss = -(_log_sigmoid(s_pos) + _log_sigmoid(-s_neg).sum())
    grad_v = g_pos * u_o + u_negs.T @ g_neg
    grad_o = g_pos * v_c
    grad_negs = np.outer(g_neg, v_c)
    return loss, grad_v, grad_o, grad_negs


def _build_pairs(
    walks_idx: list[np.ndarray], window: int
) -> tuple[np.ndarray, np.ndarray]:
    # pairs are laid out in walk order: walk by walk, position by position
    centers: list[int] = []
    contexts: list[int] = []
    for walk in walks_idx:
        n = len(walk)
        for i in range(n):
            for j in range(max(0, i - window), min(n, i + window + 1)):
                if j != i:
                    centers.append(walk[i])
                    contexts.append(walk[j])
    if not centers:
        raise ContractViolation("walks too short to form any training pair")
    return np.array(centers, dtype=np.int64), np.array(contexts, dtype=np.int64)


class _SGNS:
    def __init__(self, walks: Sequence[Sequence[str]], cfg: TrainConfig):
        if not walks:
            raise ContractViolation("empty walk set")
        self.cfg = cfg
        self.vocab = sorted({tok for walk in walks for tok in walk})
        if len(self.vocab) < 2:
            raise ContractViolation(
                "vocabulary of size < 2: negative sampling is impossible"
            )
        index = {tok: i for i, tok in enumerate(self.vocab)}
        walks_idx = [
            np.array([index[t] for t in walk], dtype=np.int64) for walk in walks
        ]
        self.centers, self.contexts = _build_pairs(walks_idx, cfg.window_size)

        counts = np.zeros(len(self.vocab))
        for walk in walks_idx:
            np.add.at(counts, walk, 1.0)
        noise = counts**0.75
        self.noise_cdf = np.cumsum(noise / noise.sum())

        init_rng = np.random.default_rng(derive_seed(cfg.rng_seed, "sgns-init"))
        bound = 0.5 / cfg.embedding_dim
        self.w_in = init_rng.uniform(
            -bound, bound, size=(len(self.vocab), cfg.embedding_dim)
        )
        self.w_out = np.zeros((len(self.vocab), cfg.embedding_dim))

    def _draw_negatives(self, rng: np.random.Generator, n_pairs: int) -> np.ndarray:
        u = rng.random((n_pairs, self.cfg.num_negatives))
        return np.searchsorted(self.noise_cdf, u, side="right").astype(np.int64)

    def train(self) -> list[float]:
        # Negatives are drawn once per pair and reused across epochs, so the
        # objective is fixed and per-epoch average loss shrinks smoothly.
        cfg = self.cfg
        rng = np.random.default_rng(derive_seed(cfg.rng_seed, "sgns-train"))
        n_pairs = len(self.centers)
        negatives = self._draw_negatives(rng, n_pairs)
        total_steps = cfg.epochs * n_pairs
        lr0, lr_min = cfg.learning_rate, cfg.min_learning_rate
        epoch_losses: list[float] = []
        step = 0
        for _ in range(cfg.epochs):
            if cfg.parallel:
                loss = self._run_epoch_parallel(negatives, step, total_steps, lr0, lr_min)
            else:
                loss = self._run_epoch(
                    range(n_pairs), negatives, step, total_steps, lr0, lr_min
                )
            step += n_pairs
            epoch_losses.append(loss / n_pairs)
        return epoch_losses

    def _run_epoch(self, indices, negatives, step0, total_steps, lr0, lr_min) -> float:
        w_in, w_out = self.w_in, self.w_out
        centers, contexts = self.centers, self.contexts
        lr_slope = (lr0 - lr_min) / total_steps
        total_loss = 0.0
        exp, log1p = math.exp, math.log1p
        for n, i in enumerate(indices):
            lr = lr0 - (step0 + n) * lr_slope
            if lr < lr_min:
                lr = lr_min
            c, o = centers[i], contexts[i]
            negs = negatives[i]
            v_c = w_in[c]
            u_o = w_out[o]
            u_n = w_out[negs]
            s_pos = float(u_o @ v_c)
            s_neg = u_n @ v_c
            if s_pos > -60.0:
                e = exp(-s_pos)
                g_pos = -e / (1.0 + e)  # sigmoid(s) - 1
                total_loss += log1p(e)
            else:
                g_pos = -1.0
                total_loss += -s_pos
            g_neg = _sigmoid(s_neg)
            total_loss += np.logaddexp(0.0, s_neg).sum()
            grad_v = g_pos * u_o + u_n.T @ g_neg
            # update order: output rows first (v_c view still unmodified);
            # negatives one row at a time so duplicate draws accumulate
            w_out[o] -= (lr * g_pos) * v_c
            for t in range(len(negs)):
                w_out[negs[t]] -= (lr * g_neg[t]) * v_c
            w_in[c] -= lr * grad_v
        return total_loss

    def _run_epoch_parallel(self, negatives, step0, total_steps, lr0, lr_min) -> float:
        # Lock-free: workers update shared weight matrices without
        # synchronization, so results are not reproducible in this mode.
        n_pairs = len(self.centers)
        n_workers = 4
        chunks = np.array_split(np.arange(n_pairs), n_workers)
        with ThreadPoolExecutor(max_workers=n_workers) as pool:
            futures = [
                pool.submit(
                    self._run_epoch,
                    chunk,
                    negatives,
                    step0 + chunk[0] if len(chunk) else step0,
                    total_steps,
                    lr0,
                    lr_min,
                )
                for chunk in chunks
            ]
            return sum(f.result() for f in futures)


def train_skipgram(
    walks: Sequence[Sequence[str]],
    cfg: TrainConfig,
    domain: str = "",
    year: int = 0,
) -> EmbeddingTable:
    """Train input-side vectors over a walk set. Deterministic unless parallel."""
    model = _SGNS(walks, cfg)
    losses = model.train()
    vectors = {kw: model.w_in[i].copy() for i, kw in enumerate(model.vocab)}
    return EmbeddingTable(
        domain=domain,
        year=year,
        dim=cfg.embedding_dim,
        vectors=vectors,
        epoch_losses=tuple(losses),
    )


def embed_graph(graph: CoocGraph, cfg: TrainConfig) -> EmbeddingTable:
    """Walks plus SGNS over one slice graph. Isolated nodes get no vector."""
    walks = generate_walks(graph, cfg)
    return train_skipgram(walks, cfg, domain=graph.domain, year=graph.year)
