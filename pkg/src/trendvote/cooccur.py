"""Keyword co-occurrence graphs for one (domain, year) slice.

Nodes are normalized keywords; an undirected edge carries the number of works
in which both endpoints appear. Edge keys are sorted pairs, so symmetry holds
by construction and there are no self-edges.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable

from .corpus import CorpusStore, WorkRecord
from .errors import ContractViolation


@dataclass
class CoocGraph:
    domain: str
    year: int
    nodes: tuple[str, ...]
    edges: dict[tuple[str, str], int]
    _adj: dict[str, list[tuple[str, int]]] | None = field(
        default=None, repr=False, compare=False
    )

    def weight(self, u: str, v: str) -> int:
        if u == v:
            return 0
        key = (u, v) if u < v else (v, u)
        return self.edges.get(key, 0)

    def adjacency(self) -> dict[str, list[tuple[str, int]]]:
        """Neighbor lists (sorted by neighbor name) with edge weights."""
        if self._adj is None:
            adj: dict[str, list[tuple[str, int]]] = {n: [] for n in self.nodes}
            for (u, v), w in self.edges.items():
                adj[u].append((v, w))
                adj[v].append((u, w))
            for lst in adj.values():
                lst.sort()
            self._adj = adj
        return self._adj

    def non_isolated_nodes(self) -> tuple[str, ...]:
        adj = self.adjacency()
        return tuple(n for n in self.nodes if adj[n])

    def isolated_nodes(self) -> tuple[str, ...]:
        adj = self.adjacency()
        return tuple(n for n in self.nodes if not adj[n])

    def serialized(self) -> dict:
        """Canonical dict form: each edge listed once with sorted endpoints."""
        return {
            "domain": self.domain,
            "year": self.year,
            "nodes": list(self.nodes),
            "edges": [[u, v, w] for (u, v), w in sorted(self.edges.items())],
        }

    @classmethod
    def from_serialized(cls, obj: dict) -> "CoocGraph":
        return cls(
            domain=obj["domain"],
            year=obj["year"],
            nodes=tuple(obj["nodes"]),
            edges={(u, v): w for u, v, w in obj["edges"]},
        )

    @classmethod
    def merge(cls, parts: Iterable["CoocGraph"]) -> "CoocGraph":
        """Combine partial graphs built from a partition of one slice.

        Edge counts add commutatively, so partition order does not matter.
        """
        parts = list(parts)
        if not parts:
            raise ContractViolation("cannot merge zero graph parts")
        domain, year = parts[0].domain, parts[0].year
        nodes: set[str] = set()
        edges: dict[tuple[str, str], int] = {}
        for part in parts:
            if (part.domain, part.year) != (domain, year):
                raise ContractViolation("graph parts span mixed (domain, year)")
            nodes.update(part.nodes)
            for key, w in part.edges.items():
                edges[key] = edges.get(key, 0) + w
        return cls(domain=domain, year=year, nodes=tuple(sorted(nodes)), edges=edges)


def build_cooccurrence_graph(works: Iterable[WorkRecord]) -> CoocGraph:
    """Count unordered keyword pairs over a single (domain, year) slice.

    Every work increments each of its keyword pairs by one; nodes are the
    union of all keywords, including ones that never co-occur.
    """
    works = list(works)
    if not works:
        raise ContractViolation("cannot build a graph from an empty slice")
    domain, year = works[0].domain, works[0].year
    nodes: set[str] = set()
    edges: dict[tuple[str, str], int] = {}
    for rec in works:
        if (rec.domain, rec.year) != (domain, year):
            raise ContractViolation(
                f"mixed slice: {rec.work_id} is {rec.domain}/{rec.year}, "
                f"expected {domain}/{year}"
            )
        kws = sorted(rec.keyword_names())
        nodes.update(kws)
        for pair in combinations(kws, 2):
            edges[pair] = edges.get(pair, 0) + 1
    return CoocGraph(domain=domain, year=year, nodes=tuple(sorted(nodes)), edges=edges)


def graph_from_slice(store: CorpusStore, domain: str, year: int) -> CoocGraph:
    return build_cooccurrence_graph(store.works_in_slice(domain, year))
