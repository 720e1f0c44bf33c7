"""Undirected communication topology over dense agent ids."""

from __future__ import annotations

import logging
from collections.abc import Iterable
from dataclasses import dataclass
from pathlib import Path

import networkx as nx

from ..utils.exceptions import TopologyError

logger = logging.getLogger(__name__)

AgentId = int


@dataclass(frozen=True)
class Graph:
    """Immutable undirected graph on agents ``0..n-1``.

    ``adjacency[i]`` is the neighbor set N_i. Symmetry and the absence of
    self-loops are checked on construction; connectivity is a property the
    generators guarantee and the round engines check (see ``is_connected``).
    """

    n: int
    adjacency: tuple[frozenset[AgentId], ...]

    def __post_init__(self) -> None:
        if self.n < 1:
            raise TopologyError(f"Graph needs at least one agent, got n={self.n}")
        if len(self.adjacency) != self.n:
            raise TopologyError(
                f"Adjacency has {len(self.adjacency)} rows for n={self.n}"
            )
        for i, neighbors in enumerate(self.adjacency):
            if i in neighbors:
                raise TopologyError(f"Self-loop at agent {i}")
            for j in neighbors:
                if not 0 <= j < self.n:
                    raise TopologyError(f"Agent {i} lists unknown neighbor {j}")
                if i not in self.adjacency[j]:
                    raise TopologyError(f"Edge ({i},{j}) is not symmetric")

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]]) -> Graph:
        """Build a graph from unordered pairs; duplicates are merged."""
        rows: list[set[int]] = [set() for _ in range(n)]
        for i, j in edges:
            if i == j:
                raise TopologyError(f"Self-loop at agent {i}")
            if not (0 <= i < n and 0 <= j < n):
                raise TopologyError(f"Edge ({i},{j}) outside [0, {n})")
            rows[i].add(j)
            rows[j].add(i)
        return cls(n=n, adjacency=tuple(frozenset(r) for r in rows))

    def neighbors(self, i: AgentId) -> frozenset[AgentId]:
        return self.adjacency[i]

    def has_edge(self, i: AgentId, j: AgentId) -> bool:
        return j in self.adjacency[i]

    def degree(self, i: AgentId) -> int:
        return len(self.adjacency[i])

    def edges(self) -> list[tuple[AgentId, AgentId]]:
        """Sorted unordered edges as (i, j) with i < j."""
        return sorted((i, j) for i in range(self.n) for j in self.adjacency[i] if i < j)

    @property
    def num_edges(self) -> int:
        return sum(len(a) for a in self.adjacency) // 2

    def to_networkx(self) -> nx.Graph:
        graph = nx.Graph()
        graph.add_nodes_from(range(self.n))
        graph.add_edges_from(self.edges())
        return graph


def is_connected(g: Graph) -> bool:
    """True iff a traversal from agent 0 reaches every agent."""
    return len(nx.node_connected_component(g.to_networkx(), 0)) == g.n


def format_edge_list(g: Graph) -> str:
    """Serialize as ``n`` on the first line, then one ``i j`` pair per line."""
    lines = [str(g.n)] + [f"{i} {j}" for i, j in g.edges()]
    return "\n".join(lines) + "\n"


def parse_edge_list(text: str) -> Graph:
    """Parse the edge-list format produced by ``format_edge_list``.

    Raises:
        TopologyError: On malformed lines, bad ids or a disconnected graph
    """
    lines = [line.strip() for line in text.splitlines() if line.strip()]
    if not lines:
        raise TopologyError("Empty edge list")
    try:
        n = int(lines[0])
        edges = []
        for line in lines[1:]:
            i, j = (int(tok) for tok in line.split())
            edges.append((i, j))
    except ValueError as e:
        raise TopologyError(f"Malformed edge list: {e}") from e
    graph = Graph.from_edges(n, edges)
    if not is_connected(graph):
        raise TopologyError("Edge list describes a disconnected graph")
    return graph


def write_edge_list(g: Graph, path: Path) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(format_edge_list(g), encoding="utf-8")


def read_edge_list(path: Path) -> Graph:
    logger.debug(f"Reading edge list from {path}")
    return parse_edge_list(path.read_text(encoding="utf-8"))
