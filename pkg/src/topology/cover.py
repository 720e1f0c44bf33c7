"""Non-adjacent neighbor sets and the greedy cover used for noise reduction."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Protocol

from ..utils.exceptions import TopologyError
from .graph import AgentId, Graph


class IndexSource(Protocol):
    """Anything that draws a uniform index, e.g. ``numpy.random.Generator``."""

    def integers(self, high: int) -> int: ...


@dataclass(frozen=True)
class CoverPlan:
    """Assignment of helper neighbors to the recipients they can cover.

    Every neighbor of the planning agent appears exactly once, either as a
    target of one assignment or in ``uncovered``.
    """

    assignments: tuple[tuple[AgentId, frozenset[AgentId]], ...]
    uncovered: frozenset[AgentId]

    @property
    def covered(self) -> frozenset[AgentId]:
        return frozenset().union(*(targets for _, targets in self.assignments))

    def helper_for(self, j: AgentId) -> AgentId | None:
        """Return the helper whose noise covers ``j``, or None if uncovered."""
        for k, targets in self.assignments:
            if j in targets:
                return k
        return None


def non_adjacent_neighbors(g: Graph, i: AgentId, j: AgentId) -> frozenset[AgentId]:
    """N_i^j: neighbors of ``i`` that are neither ``j`` nor adjacent to ``j``.

    Raises:
        TopologyError: If ``j`` is not a neighbor of ``i``
    """
    if not g.has_edge(i, j):
        raise TopologyError(f"Agent {j} is not a neighbor of agent {i}")
    return g.neighbors(i) - g.neighbors(j) - {j}


def cover_neighbors(g: Graph, i: AgentId, rng: IndexSource) -> CoverPlan:
    """Greedy randomized cover of N_i.

    Helpers are drawn uniformly without replacement; each takes every still
    uncovered member of its non-adjacent set. The loop stops when all
    neighbors are covered or every helper has been tried. Runs in
    O(|N_i| * max degree).
    """
    if g.degree(i) == 0:
        raise TopologyError(f"Agent {i} has no neighbors to cover")
    uncovered = set(g.neighbors(i))
    candidates = sorted(g.neighbors(i))
    assignments: list[tuple[AgentId, frozenset[AgentId]]] = []
    while uncovered and candidates:
        k = candidates.pop(int(rng.integers(len(candidates))))
        targets = non_adjacent_neighbors(g, i, k) & uncovered
        if targets:
            assignments.append((k, frozenset(targets)))
            uncovered -= targets
    return CoverPlan(assignments=tuple(assignments), uncovered=frozenset(uncovered))


def coverable_fraction(g: Graph) -> float:
    """Share of directed edges (i, j) with N_i^j non-empty."""
    total = 0
    coverable = 0
    for i in range(g.n):
        for j in g.neighbors(i):
            total += 1
            coverable += bool(non_adjacent_neighbors(g, i, j))
    return coverable / total if total else 0.0
