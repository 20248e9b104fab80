from itertools import combinations

import numpy as np
import pytest

from trendvote.agents import AgentClient, MockTable
from trendvote.cooccur import CoocGraph
from trendvote.embedding import EmbeddingTable, TrainConfig, embed_graph
from trendvote import simulator

BARBELL_SEED = 0


def make_barbell(n_clique: int = 10) -> CoocGraph:
    """Two n-cliques joined by a single bridge edge."""
    left = [f"l{i:02d}" for i in range(n_clique)]
    right = [f"r{i:02d}" for i in range(n_clique)]
    edges = {}
    for group in (left, right):
        for a, b in combinations(group, 2):
            edges[(a, b)] = 1
    edges[tuple(sorted((left[0], right[0])))] = 1
    return CoocGraph(
        domain="ArtificialIntelligence",
        year=2025,
        nodes=tuple(sorted(left + right)),
        edges=edges,
    )


def barbell_sides(n_clique: int = 10):
    return (
        [f"l{i:02d}" for i in range(n_clique)],
        [f"r{i:02d}" for i in range(n_clique)],
    )


@pytest.fixture(scope="session")
def barbell_run() -> tuple[EmbeddingTable, float]:
    """Default-config training on the barbell fixture, plus its wall time.

    Session-scoped because the 25-epoch run is the slowest fixture in the
    suite; the acceptance test charges the training time against its budget.
    """
    import time

    graph = make_barbell()
    started = time.perf_counter()
    table = embed_graph(graph, TrainConfig(rng_seed=BARBELL_SEED))
    return table, time.perf_counter() - started


@pytest.fixture(scope="session")
def barbell_table(barbell_run) -> EmbeddingTable:
    return barbell_run[0]


def make_table(vectors: dict[str, list[float]], domain="Physics", year=2025) -> EmbeddingTable:
    arrays = {k: np.asarray(v, dtype=float) for k, v in vectors.items()}
    dim = len(next(iter(arrays.values())))
    return EmbeddingTable(domain=domain, year=year, dim=dim, vectors=arrays)


def mock_client(responder=simulator.respond, **kwargs) -> AgentClient:
    return AgentClient(mock_table=MockTable(responder=responder), **kwargs)


def cos(a: np.ndarray, b: np.ndarray) -> float:
    return float(a @ b / (np.linalg.norm(a) * np.linalg.norm(b)))
